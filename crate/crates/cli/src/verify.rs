use std::f64::consts::PI;
use std::path::Path;

use lenslab::flow::trace_from_boundary;
use lenslab::intgeo::{
    average_angle_identity, crofton_check, length_via_crofton, santalo_check, theta_grid, trapped_measure, CroftonGrid,
    CurveSpec,
};
use lenslab::jacobi::{area_via_fan, inverse_square_functional, write_fan_csv};
use lenslab::lens::{build_lens_table, compare_lens};
use lenslab::report::{write_bracket_plot, write_report, write_theta_plot, ReportRow};
use lenslab::{SurfaceModel, TraceOptions};

use crate::args::{Check, Common};
use crate::{create_file, load_surface, parse_grid, parse_start, Failure, Outcome};

/// Rows for the report plus the failed conditions.
#[derive(Default)]
struct Verdict {
    rows: Vec<ReportRow>,
    failures: Vec<String>,
}

impl Verdict {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn lib<T>(name: &str, r: lenslab::Result<T>) -> Outcome<T> {
    r.map_err(|e| Failure::Check {
        name: name.into(),
        detail: e.to_string(),
    })
}

fn parse_curve(text: &str) -> Outcome<CurveSpec> {
    let bad = || Failure::Usage(format!("bad curve `{text}`, expected circle:T or meridian:X:T0:T1"));
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["circle", t] => Ok(CurveSpec::Circle { t: num(t)? }),
        ["meridian", x, t0, t1] => Ok(CurveSpec::Meridian {
            x: num(x)?,
            t0: num(t0)?,
            t1: num(t1)?,
        }),
        _ => Err(bad()),
    }
}

fn parse_pair(text: &str) -> Outcome<(usize, usize)> {
    let bad = || Failure::Usage(format!("bad grid `{text}`, expected NxM"));
    let (a, b) = text.split_once('x').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Smallest warp on the band, from a fine scan plus the profile breakpoints.
fn min_warp(s: &SurfaceModel) -> f64 {
    let mut ts: Vec<f64> = (0..=4096).map(|k| s.t_min() + s.width() * k as f64 / 4096.0).collect();
    if let Some(p) = s.profile() {
        ts.extend(p.breakpoints().into_iter().filter(|t| *t >= s.t_min() && *t <= s.t_max()));
    }
    ts.into_iter().map(|t| s.warp(t).f).fold(f64::INFINITY, f64::min)
}

fn crofton(surface: &str, curve: &str, grid: &str, n_tau: usize, n_phi: usize, tol: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    let curve = parse_curve(curve)?;
    let (n_s, n_theta) = parse_pair(grid)?;
    let g = CroftonGrid { n_s, n_theta, n_tau, n_phi };
    let r = lib("crofton", crofton_check(&s, &curve, &g, &TraceOptions::default()))?;
    let mut v = Verdict::default();
    let rel = r.discrepancy() / r.rhs.value.abs();
    let combined = r.lhs.error + r.rhs.error;
    v.rows.push(ReportRow::new("crofton", surface, r.lhs.value, r.rhs.value, r.lhs.samples, Some(c.seed)).with_err(combined));
    v.rows.push(ReportRow::new("crofton_length", surface, r.lhs.value, 4.0 * r.length, r.lhs.samples, Some(c.seed)));
    v.require(
        rel < tol || r.discrepancy() <= combined,
        format!("relative discrepancy {rel:e} above {tol:e} and outside the error bound {combined:e}"),
    );
    Ok(v)
}

fn santalo(surface: &str, n_s: usize, quad_tol: f64, tol: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    let r = lib("santalo", santalo_check(&s, n_s, quad_tol, &TraceOptions::default()))?;
    let mut v = Verdict::default();
    let mut row = ReportRow::from_estimate("santalo", surface, &r.boundary, r.phase_volume);
    row.seed = Some(c.seed);
    v.rows.push(row);
    v.require(
        r.relative_diff() < tol,
        format!(
            "boundary integral {} vs 2pi*Area {} (rel {:e}, {} trapped integrand evaluations)",
            r.boundary.value,
            r.phase_volume,
            r.relative_diff(),
            r.trapped_evals
        ),
    );
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn length(surface: &str, start: &str, samples: usize, runs: u64, sigmas: f64, min_pass: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    let bv = parse_start(start)?;
    if runs == 0 {
        return Err(Failure::Usage("--runs must be positive".into()));
    }
    let opts = TraceOptions::default();
    let g = lib("length", trace_from_boundary(&s, &bv, &opts))?;
    let Some(len) = g.travel_time else {
        return Err(Failure::Check {
            name: "length".into(),
            detail: format!("geodesic from {start} does not exit ({:?})", g.status),
        });
    };
    let mut v = Verdict::default();
    let mut pass = 0u64;
    for k in 0..runs {
        let seed = c.seed.wrapping_add(k);
        let e = lib("length", length_via_crofton(&s, &g.polyline, samples, seed, &opts))?;
        if (e.value - len).abs() <= sigmas * e.error {
            pass += 1;
        }
        v.rows.push(ReportRow::from_estimate("length", surface, &e, len));
    }
    let need = (min_pass * runs as f64).ceil() as u64;
    v.require(pass >= need, format!("{pass}/{runs} runs within {sigmas} standard errors, need {need}"));
    Ok(v)
}

fn jacobi(surface: &str, fan: usize, tol: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    if fan == 0 {
        return Err(Failure::Usage("--fan must be positive".into()));
    }
    let opts = TraceOptions::default();
    let len = lib("jacobi", s.component(0))?.length;
    let feet: Vec<f64> = (0..fan).map(|k| (k as f64 + 0.5) * len / fan as f64).collect();
    let rows = lib("jacobi", inverse_square_functional(&s, &feet, &opts))?;
    lib("jacobi", write_fan_csv(&rows, create_file(&c.out.join("jacobi_fan.csv"))?))?;
    let area = lib("jacobi", area_via_fan(&s, fan, &opts))?;
    let mut v = Verdict::default();
    let l = s.width();
    for r in &rows {
        // convexity of x⁻²: ∫ j⁻² ≥ L³ / (∫ j)², equality iff j is constant
        let jensen = l * l * l / (r.integral_j * r.integral_j);
        v.rows.push(ReportRow::new("jacobi_inv_sq", surface, r.integral_inv_sq, jensen, 1, Some(c.seed)));
        if s.is_flat_band() {
            v.require((r.integral_inv_sq - 1.0).abs() <= tol, format!("flat fan value {} is not 1", r.integral_inv_sq));
        }
        v.require(r.integral_inv_sq >= jensen - tol, format!("fan value {} below the convexity bound {jensen}", r.integral_inv_sq));
    }
    v.rows.push(ReportRow::new("jacobi_area", surface, area.fan_integral, area.direct_area, fan, Some(c.seed)));
    v.require(area.relative_diff() < tol, format!("fan area {} vs area {}", area.fan_integral, area.direct_area));
    Ok(v)
}

fn trapped(surface: &str, t0: f64, x0: f64, directions: usize, tol: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    let tm = lib("trapped", trapped_measure(&s, t0, x0, directions, &TraceOptions::default()))?;
    lib("trapped", write_bracket_plot(&tm.brackets, create_file(&c.out.join("trapped_brackets.csv"))?))?;
    // Clairaut: a direction stays in the band iff |F(t0) sin α| exceeds the smallest warp
    let ratio = (min_warp(&s) / s.warp(t0).f).min(1.0);
    let mut v = Verdict::default();
    let mut bound = ReportRow::from_estimate("trapped_measure", surface, &tm.bound, 0.0);
    bound.seed = Some(c.seed);
    v.rows.push(bound);
    for b in &tm.brackets {
        let sin = b.center().sin().abs();
        v.rows.push(ReportRow::new("trapped_center", surface, sin, ratio, directions, Some(c.seed)).with_err(b.width()));
        v.require(
            (sin.asin() - ratio.asin()).abs() <= tol,
            format!("bracket [{}, {}] centered off the Clairaut angle asin({ratio})", b.lo, b.hi),
        );
    }
    v.require(tm.brackets.len() == 2, format!("{} brackets, expected 2", tm.brackets.len()));
    Ok(v)
}

fn mobius_cap(l: f64, grid: &str, tol: f64, c: &Common) -> Outcome<Verdict> {
    let m = SurfaceModel::mobius(l)?;
    let cap = SurfaceModel::capped(l)?;
    let opts = TraceOptions::default();
    let a = lib("mobius-cap", build_lens_table(&m, &parse_grid(&m, grid)?, &opts))?;
    let b = lib("mobius-cap", build_lens_table(&cap, &parse_grid(&cap, grid)?, &opts))?;
    let r = lib("mobius-cap", compare_lens(&a, &b, tol))?;
    let mut v = Verdict::default();
    let name = format!("mobius l={l} vs capped l={l}");
    let scatter = r.max_position.max(r.max_angle);
    v.rows.push(ReportRow::new("scattering", name.clone(), scatter, 0.0, r.compared, Some(c.seed)));
    v.require(r.scattering_equivalent, format!("scattering discrepancy {scatter:e}"));
    match r.tt_offset {
        Some(off) => {
            v.rows.push(ReportRow::new("tt_offset_min", name.clone(), off.min, PI, r.compared, Some(c.seed)));
            v.rows.push(ReportRow::new("tt_offset_max", name, off.max, PI, r.compared, Some(c.seed)));
            let dev = (off.min - PI).abs().max((off.max - PI).abs());
            v.require(dev <= tol, format!("travel time offset deviates from pi by {dev:e}"));
        }
        None => v.require(false, "no node exited on both surfaces"),
    }
    Ok(v)
}

fn bump_family(shifts: &[f64], amplitude: f64, eps: f64, grid: &str, tol: f64, c: &Common) -> Outcome<Verdict> {
    if shifts.len() < 2 {
        return Err(Failure::Usage("bump-family needs at least two --s values".into()));
    }
    let opts = TraceOptions::default();
    let surfaces: Vec<SurfaceModel> = shifts
        .iter()
        .map(|&s| SurfaceModel::bump(amplitude, eps, s))
        .collect::<lenslab::Result<_>>()?;
    let g = parse_grid(&surfaces[0], grid)?;
    let base = lib("bump-family", build_lens_table(&surfaces[0], &g, &opts))?;
    let mut v = Verdict::default();
    for (s, shift) in surfaces.iter().zip(shifts).skip(1) {
        let t = lib("bump-family", build_lens_table(s, &g, &opts))?;
        let r = lib("bump-family", compare_lens(&base, &t, tol))?;
        let name = format!("bump s={} vs s={shift}", shifts[0]);
        v.rows.push(ReportRow::new("lens_position", name.clone(), r.max_position, 0.0, r.compared, Some(c.seed)));
        v.rows.push(ReportRow::new("lens_angle", name.clone(), r.max_angle, 0.0, r.compared, Some(c.seed)));
        v.rows.push(ReportRow::new("lens_travel_time", name.clone(), r.max_travel_time, 0.0, r.compared, Some(c.seed)));
        v.require(r.lens_equivalent, format!("{name}: not lens equivalent at tol {tol:e}"));
    }
    Ok(v)
}

fn theta_identity(surface: &str, grid: usize, samples: usize, tol: f64, c: &Common) -> Outcome<Verdict> {
    let s = load_surface(surface)?;
    let thetas = theta_grid(grid);
    let r = lib("theta-identity", average_angle_identity(&s, &thetas, samples, c.seed, &TraceOptions::default()))?;
    lib("theta-identity", write_theta_plot(&r, create_file(&c.out.join("theta_identity.csv"))?))?;
    let mut v = Verdict::default();
    for (th, m) in r.thetas.iter().zip(&r.means) {
        v.rows.push(ReportRow::new("theta_identity", surface, *m, *th, r.samples, Some(c.seed)));
    }
    v.require(r.max_deviation() <= tol, format!("max |Theta - theta| = {:e}", r.max_deviation()));
    v.require(r.symmetry_defect() <= tol, format!("symmetry defect {:e}", r.symmetry_defect()));
    Ok(v)
}

fn finish(name: &str, out: &Path, v: Verdict) -> Outcome {
    let path = out.join(format!("{name}.csv"));
    lib(name, write_report(&v.rows, create_file(&path)?))?;
    for r in &v.rows {
        println!("{} {}: lhs {} rhs {} rel_err {:e}", r.check, r.surface, r.lhs, r.rhs, r.rel_err);
    }
    println!("report: {}", path.display());
    if v.failures.is_empty() {
        println!("PASS {name}");
        Ok(())
    } else {
        Err(Failure::Check {
            name: name.into(),
            detail: v.failures.join("; "),
        })
    }
}

pub fn run(check: Check) -> Outcome {
    let (name, common, verdict) = match check {
        Check::Crofton { surface, curve, grid, n_tau, n_phi, tol, common } => {
            let v = crofton(&surface, &curve, &grid, n_tau, n_phi, tol, &common);
            ("crofton", common, v)
        }
        Check::Santalo { surface, n_s, quad_tol, tol, common } => {
            let v = santalo(&surface, n_s, quad_tol, tol, &common);
            ("santalo", common, v)
        }
        Check::Length { surface, start, samples, runs, tol, min_pass, common } => {
            let v = length(&surface, &start, samples, runs, tol, min_pass, &common);
            ("length", common, v)
        }
        Check::Jacobi { surface, fan, tol, common } => {
            let v = jacobi(&surface, fan, tol, &common);
            ("jacobi", common, v)
        }
        Check::Trapped { surface, t0, x0, directions, tol, common } => {
            let v = trapped(&surface, t0, x0, directions, tol, &common);
            ("trapped", common, v)
        }
        Check::MobiusCap { l, grid, tol, common } => {
            let v = mobius_cap(l, &grid, tol, &common);
            ("mobius-cap", common, v)
        }
        Check::BumpFamily { shifts, amplitude, eps, grid, tol, common } => {
            let v = bump_family(&shifts, amplitude, eps, &grid, tol, &common);
            ("bump-family", common, v)
        }
        Check::ThetaIdentity { surface, grid, samples, tol, common } => {
            let v = theta_identity(&surface, grid, samples, tol, &common);
            ("theta-identity", common, v)
        }
    };
    finish(name, &common.out, verdict?)
}
