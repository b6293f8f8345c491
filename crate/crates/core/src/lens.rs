//! Scattering records and lens tables over grids on the inward boundary
//! vectors, with CSV persistence and table comparison.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{self, TraceOptions, TraceStatus};
use crate::surface::SurfaceModel;

/// `(component, arclength, angle)`. For inward vectors the angle is taken
/// from the inward normal; for exit vectors from the outward normal. The
/// sign follows the component's tangent orientation in both cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryVector {
    pub component: usize,
    pub s: f64,
    pub theta: f64,
}

impl BoundaryVector {
    pub fn new(component: usize, s: f64, theta: f64) -> Self {
        Self { component, s, theta }
    }

    /// Reverses an exit vector into the inward vector of the reversed
    /// geodesic (and vice versa).
    pub fn flipped(&self) -> Self {
        Self {
            theta: -self.theta,
            ..*self
        }
    }
}

impl fmt::Display for BoundaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "comp={} s={} theta={}", self.component, self.s, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordStatus {
    Exited,
    Trapped,
    Tangent,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Exited => "exited",
            RecordStatus::Trapped => "trapped",
            RecordStatus::Tangent => "tangent",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exited" => Ok(RecordStatus::Exited),
            "trapped" => Ok(RecordStatus::Trapped),
            "tangent" => Ok(RecordStatus::Tangent),
            other => Err(Error::Format(format!("unknown status `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRecord {
    pub input: BoundaryVector,
    pub status: RecordStatus,
    pub output: Option<BoundaryVector>,
    pub travel_time: Option<f64>,
}

pub fn scattering(surface: &SurfaceModel, bv: &BoundaryVector, opts: &TraceOptions) -> Result<ScatterRecord> {
    let r = flow::trace_from_boundary(surface, bv, opts)?;
    let status = match r.status {
        TraceStatus::Exited => RecordStatus::Exited,
        TraceStatus::TrappedForward { .. } => RecordStatus::Trapped,
        TraceStatus::Tangent => RecordStatus::Tangent,
    };
    Ok(ScatterRecord {
        input: *bv,
        status,
        output: r.exit.map(|e| BoundaryVector::new(e.component, e.s, e.theta)),
        travel_time: r.travel_time,
    })
}

/// Angle nodes for one component.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaNodes {
    /// `n` cell centers of `[−π/2, π/2]`.
    Centers(usize),
    Explicit(Vec<f64>),
}

impl ThetaNodes {
    pub fn len(&self) -> usize {
        match self {
            ThetaNodes::Centers(n) => *n,
            ThetaNodes::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ThetaNodes::Centers(n) => (0..*n)
                .map(|j| -FRAC_PI_2 + (j as f64 + 0.5) * PI / *n as f64)
                .collect(),
            ThetaNodes::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentGrid {
    /// Arclength nodes at the `n_s` cell centers of `[0, length)`.
    pub n_s: usize,
    pub theta: ThetaNodes,
}

/// Per-component node layout, in the surface's component order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub components: Vec<ComponentGrid>,
}

impl GridSpec {
    /// `n_s × n_θ` cell-center grid on every component of `surface`.
    pub fn uniform(surface: &SurfaceModel, n_s: usize, n_theta: usize) -> Self {
        let n = surface.boundary().components.len();
        Self {
            components: vec![
                ComponentGrid {
                    n_s,
                    theta: ThetaNodes::Centers(n_theta),
                };
                n
            ],
        }
    }

    pub fn node_count(&self) -> usize {
        self.components.iter().map(|c| c.n_s * c.theta.len()).sum()
    }

    /// Grid nodes in table order: component, then `s`, then `θ`.
    pub fn nodes(&self, lengths: &[f64]) -> Result<Vec<BoundaryVector>> {
        if lengths.len() != self.components.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} components, surface has {}",
                self.components.len(),
                lengths.len()
            )));
        }
        let mut out = Vec::with_capacity(self.node_count());
        for (id, (g, &len)) in self.components.iter().zip(lengths).enumerate() {
            if g.n_s == 0 || g.theta.is_empty() {
                return Err(Error::InvalidInput(format!("component {id}: empty grid")));
            }
            let thetas = g.theta.values();
            for i in 0..g.n_s {
                let s = (i as f64 + 0.5) * len / g.n_s as f64;
                for &th in &thetas {
                    out.push(BoundaryVector::new(id, s, th));
                }
            }
        }
        Ok(out)
    }

    /// Parses the `# grid=` form: `NxM` per component, comma separated; `M`
    /// may be an explicit list `[a;b;...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad grid spec `{text}`"));
        let components = text
            .split(',')
            .map(|part| {
                let (ns, th) = part.split_once('x').ok_or_else(bad)?;
                let n_s = ns.trim().parse().map_err(|_| bad())?;
                let th = th.trim();
                let theta = if let Some(list) = th.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                    ThetaNodes::Explicit(
                        list.split(';')
                            .filter(|v| !v.is_empty())
                            .map(|v| v.parse::<f64>().map_err(|_| bad()))
                            .collect::<Result<_>>()?,
                    )
                } else {
                    ThetaNodes::Centers(th.parse().map_err(|_| bad())?)
                };
                Ok(ComponentGrid { n_s, theta })
            })
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match &c.theta {
                ThetaNodes::Centers(n) => write!(f, "{}x{}", c.n_s, n)?,
                ThetaNodes::Explicit(v) => {
                    let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    write!(f, "{}x[{}]", c.n_s, list.join(";"))?
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LensTable {
    pub surface: String,
    pub surface_hash: String,
    pub orientation: String,
    pub boundary_lengths: Vec<f64>,
    pub grid: GridSpec,
    pub records: Vec<ScatterRecord>,
}

/// Traces every grid node (in parallel) and collects the records in grid
/// order.
pub fn build_lens_table(surface: &SurfaceModel, grid: &GridSpec, opts: &TraceOptions) -> Result<LensTable> {
    let atlas = surface.boundary();
    let lengths = atlas.lengths();
    let nodes = grid.nodes(&lengths)?;
    let opts = opts.without_polyline();
    let records = nodes
        .par_iter()
        .map(|bv| {
            scattering(surface, bv, &opts).map_err(|e| Error::Node {
                node: bv.to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LensTable {
        surface: surface.descriptor(),
        surface_hash: surface.descriptor_hash(),
        orientation: atlas.orientation.to_string(),
        boundary_lengths: lengths,
        grid: grid.clone(),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub tol: f64,
    /// Set when the boundary lengths differ by more than `tol`.
    pub boundary_mismatch: Option<String>,
    /// Nodes where both tables exited.
    pub compared: usize,
    /// Nodes whose statuses differ.
    pub status_mismatches: usize,
    pub max_position: f64,
    pub max_angle: f64,
    pub max_travel_time: f64,
    /// Statistics of `TT_b − TT_a` over compared nodes.
    pub tt_offset: Option<OffsetStats>,
    pub scattering_equivalent: bool,
    pub lens_equivalent: bool,
}

/// Distance along a circle of length `len`.
fn circular(a: f64, b: f64, len: f64) -> f64 {
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

pub fn compare_lens(a: &LensTable, b: &LensTable, tol: f64) -> Result<ComparisonReport> {
    if a.grid != b.grid {
        return Err(Error::Incomparable(format!("grids differ: {} vs {}", a.grid, b.grid)));
    }
    if a.orientation != b.orientation {
        return Err(Error::Incomparable(format!(
            "orientation conventions differ: {} vs {}",
            a.orientation, b.orientation
        )));
    }
    if a.records.len() != b.records.len() {
        return Err(Error::Incomparable("record counts differ".into()));
    }
    let boundary_mismatch = if a.boundary_lengths.len() != b.boundary_lengths.len()
        || a
            .boundary_lengths
            .iter()
            .zip(&b.boundary_lengths)
            .any(|(x, y)| (x - y).abs() > tol)
    {
        Some(format!("{:?} vs {:?}", a.boundary_lengths, b.boundary_lengths))
    } else {
        None
    };

    let mut compared = 0;
    let mut status_mismatches = 0;
    let (mut max_p, mut max_a, mut max_t) = (0.0f64, 0.0f64, 0.0f64);
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for (ra, rb) in a.records.iter().zip(&b.records) {
        if ra.input != rb.input {
            return Err(Error::Incomparable(format!("node {} vs {}", ra.input, rb.input)));
        }
        if ra.status != rb.status {
            status_mismatches += 1;
            continue;
        }
        let (Some(oa), Some(ob), Some(ta), Some(tb)) = (ra.output, rb.output, ra.travel_time, rb.travel_time) else {
            continue;
        };
        compared += 1;
        let pos = if oa.component == ob.component {
            let len = a.boundary_lengths.get(oa.component).copied().unwrap_or(f64::INFINITY);
            circular(oa.s, ob.s, len)
        } else {
            f64::INFINITY
        };
        max_p = max_p.max(pos);
        max_a = max_a.max((oa.theta - ob.theta).abs());
        max_t = max_t.max((ta - tb).abs());
        let d = tb - ta;
        lo = lo.min(d);
        hi = hi.max(d);
        sum += d;
    }
    let tt_offset = (compared > 0).then(|| OffsetStats {
        min: lo,
        max: hi,
        mean: sum / compared as f64,
    });
    let scattering_equivalent =
        boundary_mismatch.is_none() && status_mismatches == 0 && max_p < tol && max_a < tol;
    Ok(ComparisonReport {
        tol,
        boundary_mismatch,
        compared,
        status_mismatches,
        max_position: max_p,
        max_angle: max_a,
        max_travel_time: max_t,
        tt_offset,
        scattering_equivalent,
        lens_equivalent: scattering_equivalent && max_t < tol,
    })
}

const HEADER: [&str; 8] = [
    "comp_in",
    "s_in",
    "theta_in",
    "status",
    "comp_out",
    "s_out",
    "theta_out",
    "travel_time",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl LensTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let lengths: Vec<String> = self.boundary_lengths.iter().map(|l| l.to_string()).collect();
        writeln!(out, "# surface={}", self.surface)?;
        writeln!(out, "# surface_hash={}", self.surface_hash)?;
        writeln!(out, "# orientation={}", self.orientation)?;
        writeln!(out, "# boundary={}", lengths.join(","))?;
        writeln!(out, "# grid={}", self.grid)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for r in &self.records {
            w.write_record([
                r.input.component.to_string(),
                r.input.s.to_string(),
                r.input.theta.to_string(),
                r.status.as_str().to_string(),
                r.output.map(|o| o.component.to_string()).unwrap_or_default(),
                fmt_opt(r.output.map(|o| o.s)),
                fmt_opt(r.output.map(|o| o.theta)),
                fmt_opt(r.travel_time),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    /// Parses a table; rejects tables written under another orientation
    /// convention.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut meta = std::collections::BTreeMap::new();
        for line in text.lines().filter(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad metadata line `{line}`")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            meta.get(k)
                .cloned()
                .ok_or_else(|| Error::Format(format!("missing `# {k}=` metadata")))
        };
        let orientation = get("orientation")?;
        if orientation != crate::surface::ORIENTATION {
            return Err(Error::Format(format!(
                "orientation convention `{orientation}` is not `{}`",
                crate::surface::ORIENTATION
            )));
        }
        let boundary_lengths = get("boundary")?
            .split(',')
            .filter(|v| !v.is_empty())
            .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad boundary length `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        let grid = GridSpec::parse(&get("grid")?)?;

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(HEADER.iter().copied()) {
            return Err(Error::Format(format!("unexpected header {:?}", headers)));
        }
        let mut records = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let num = |i: usize| -> Result<Option<f64>> {
                let v = field(i);
                if v.is_empty() {
                    return Ok(None);
                }
                v.parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Format(format!("row {}: bad number `{v}` in {}", row + 1, HEADER[i])))
            };
            let need = |i: usize| -> Result<f64> {
                num(i)?.ok_or_else(|| Error::Format(format!("row {}: missing {}", row + 1, HEADER[i])))
            };
            let comp = |i: usize| -> Result<Option<usize>> {
                let v = field(i);
                if v.is_empty() {
                    return Ok(None);
                }
                v.parse()
                    .map(Some)
                    .map_err(|_| Error::Format(format!("row {}: bad component `{v}`", row + 1)))
            };
            let input = BoundaryVector::new(
                comp(0)?.ok_or_else(|| Error::Format(format!("row {}: missing comp_in", row + 1)))?,
                need(1)?,
                need(2)?,
            );
            let status = RecordStatus::parse(field(3))?;
            let output = match (comp(4)?, num(5)?, num(6)?) {
                (Some(c), Some(s), Some(t)) => Some(BoundaryVector::new(c, s, t)),
                (None, None, None) => None,
                _ => return Err(Error::Format(format!("row {}: partial output", row + 1))),
            };
            let travel_time = num(7)?;
            if (status == RecordStatus::Exited) != (output.is_some() && travel_time.is_some()) {
                return Err(Error::Format(format!(
                    "row {}: status {} inconsistent with outputs",
                    row + 1,
                    status.as_str()
                )));
            }
            records.push(ScatterRecord {
                input,
                status,
                output,
                travel_time,
            });
        }
        Ok(LensTable {
            surface: get("surface")?,
            surface_hash: get("surface_hash")?,
            orientation,
            boundary_lengths,
            grid,
            records,
        })
    }
}
