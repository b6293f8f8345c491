//! `lenslab` command line: surface catalog, lens tables and verification
//! suites. Reports and plot data are CSV.

mod args;
mod verify;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use lenslab::flow::{trace_from_boundary, TraceMethod};
use lenslab::lens::{build_lens_table, compare_lens, GridSpec};
use lenslab::{config, BoundaryVector, LensTable, SurfaceModel, TraceOptions};

use args::{Cli, Command, LensCmd, Method, SurfacesCmd, TraceArgs};

/// Input problems exit with 2, failed checks with 1.
pub enum Failure {
    Usage(String),
    Check { name: String, detail: String },
}

impl From<lenslab::Error> for Failure {
    fn from(e: lenslab::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub fn load_surface(spec: &str) -> Outcome<SurfaceModel> {
    config::resolve(spec).map_err(|e| Failure::Usage(format!("surface `{spec}`: {e}")))
}

/// `NxM` applies to every component; otherwise one part per component.
pub fn parse_grid(surface: &SurfaceModel, text: &str) -> Outcome<GridSpec> {
    let mut g = GridSpec::parse(text)?;
    let n = surface.boundary().components.len();
    if g.components.len() == 1 && n > 1 {
        g.components = vec![g.components[0].clone(); n];
    }
    if g.components.len() != n {
        return Err(Failure::Usage(format!("grid `{text}` has {} parts, surface has {n} components", g.components.len())));
    }
    Ok(g)
}

pub fn parse_start(text: &str) -> Outcome<BoundaryVector> {
    let bad = || Failure::Usage(format!("bad boundary vector `{text}`, expected comp,s,theta"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [c, s, th] = parts.as_slice() else {
        return Err(bad());
    };
    Ok(BoundaryVector::new(
        c.parse().map_err(|_| bad())?,
        s.parse().map_err(|_| bad())?,
        th.parse().map_err(|_| bad())?,
    ))
}

fn surfaces(cmd: SurfacesCmd) -> Outcome {
    match cmd {
        SurfacesCmd::List => {
            for (name, desc) in config::PRESETS {
                println!("{name:8} {desc}");
            }
            println!("config files: key = value with keys kind, t_min, t_max, circumference, bump_a, bump_eps, bump_s, mobius_l");
            println!("kinds: {}", config::KINDS.join(", "));
            Ok(())
        }
    }
}

fn lens(cmd: LensCmd) -> Outcome {
    match cmd {
        LensCmd::Compute { surface, grid, out } => {
            let s = load_surface(&surface)?;
            let g = parse_grid(&s, &grid)?;
            let table = build_lens_table(&s, &g, &TraceOptions::default()).map_err(|e| Failure::Check {
                name: "lens compute".into(),
                detail: e.to_string(),
            })?;
            table.save(&out)?;
            println!("{} records from {} written to {}", table.records.len(), table.surface, out.display());
            Ok(())
        }
        LensCmd::Compare { a, b, tol } => {
            let (ta, tb) = (LensTable::load(&a)?, LensTable::load(&b)?);
            let r = compare_lens(&ta, &tb, tol)?;
            println!("metric,value");
            println!("compared,{}", r.compared);
            println!("status_mismatches,{}", r.status_mismatches);
            println!("max_position,{}", r.max_position);
            println!("max_angle,{}", r.max_angle);
            println!("max_travel_time,{}", r.max_travel_time);
            println!("scattering_equivalent,{}", r.scattering_equivalent);
            println!("lens_equivalent,{}", r.lens_equivalent);
            if let Some(m) = &r.boundary_mismatch {
                println!("boundary_mismatch,{m}");
            }
            if r.lens_equivalent {
                Ok(())
            } else {
                Err(Failure::Check {
                    name: "lens compare".into(),
                    detail: format!("tables differ beyond tol {tol}"),
                })
            }
        }
    }
}

fn trace(a: TraceArgs) -> Outcome {
    let s = load_surface(&a.surface)?;
    let opts = TraceOptions::default().with_method(match a.method {
        Method::Auto => TraceMethod::Auto,
        Method::Exact => TraceMethod::Exact,
        Method::Clairaut => TraceMethod::Clairaut,
        Method::Ode => TraceMethod::Ode,
    });
    let starts: Vec<(BoundaryVector, String)> = if a.fan > 0 {
        let len = s.component(0)?.length;
        let stem = a.out.file_stem().and_then(|x| x.to_str()).unwrap_or("trace");
        let ext = a.out.extension().and_then(|x| x.to_str()).unwrap_or("csv");
        (0..a.fan)
            .map(|k| {
                let bv = BoundaryVector::new(0, (k as f64 + 0.5) * len / a.fan as f64, 0.0);
                (bv, format!("{stem}_{k}.{ext}"))
            })
            .collect()
    } else {
        vec![(parse_start(&a.start)?, a.out.to_string_lossy().into_owned())]
    };
    let dir = a.out.parent().filter(|p| !p.as_os_str().is_empty());
    for (bv, name) in starts {
        let r = trace_from_boundary(&s, &bv, &opts).map_err(|e| Failure::Check {
            name: "trace".into(),
            detail: e.to_string(),
        })?;
        let path = match dir {
            Some(d) if a.fan > 0 => d.join(&name),
            _ => Path::new(&name).to_path_buf(),
        };
        r.polyline.write_csv(s.circumference(), create_file(&path)?)?;
        match (&r.exit, r.travel_time) {
            (Some(e), Some(tt)) => println!(
                "{}: {:?} -> component {} s={} theta={} TT={} ({} samples)",
                path.display(),
                r.status,
                e.component,
                e.s,
                e.theta,
                tt,
                r.polyline.sample_count()
            ),
            _ => println!("{}: {:?} ({} samples)", path.display(), r.status, r.polyline.sample_count()),
        }
    }
    Ok(())
}

pub fn create_file(path: &Path) -> Outcome<fs::File> {
    if let Some(d) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(d).map_err(|e| Failure::Usage(format!("{}: {e}", d.display())))?;
    }
    fs::File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Surfaces { action } => surfaces(action),
        Command::Lens { action } => lens(action),
        Command::Verify { check } => verify::run(check),
        Command::Trace(a) => trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check { name, detail }) => {
            eprintln!("check {name} failed: {detail}");
            ExitCode::from(1)
        }
    }
}
