//! Scalar Jacobi fields `j″ + K j = 0` along traced geodesics: conjugate
//! points, the fan functional `∫ j⁻²` and the fan area integral.

use std::cell::Cell;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::driver::{self, DriveRequest, Observation, Stop};
use crate::flow::{initial_state, GeodesicState, JunctionKind, TraceOptions};
use crate::lens::BoundaryVector;
use crate::surface::{SurfaceKind, SurfaceModel};

/// Bisection tolerance on arclength for conjugate points.
pub const CONJUGATE_TOL: f64 = 1e-10;
/// Default sample spacing for the residual check and sign scans.
pub const SAMPLE_STEP: f64 = 1e-2;

const N: usize = 8;
// payload slots
const J: usize = 4;
const DJ: usize = 5;
const INV_SQ: usize = 6;
const INT_J: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiState {
    pub arclen: f64,
    pub t: f64,
    pub x: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub j: f64,
    pub dj: f64,
    /// Gaussian curvature at the sample.
    pub curvature: f64,
}

/// Hemisphere traversal, in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapPassage {
    pub arclen_in: f64,
    pub radius: f64,
    pub j_in: f64,
    pub dj_in: f64,
}

impl CapPassage {
    /// `j(u) = j₀ cos(u/R) + R j₀′ sin(u/R)` for `u ∈ [0, πR]`.
    pub fn j_at(&self, u: f64) -> f64 {
        let r = self.radius;
        self.j_in * (u / r).cos() + r * self.dj_in * (u / r).sin()
    }

    /// Zero of `j` strictly inside the cap.
    pub fn zero(&self) -> Option<f64> {
        let r = self.radius;
        if self.j_in == 0.0 {
            return None;
        }
        // j₀ cos φ + R j₀′ sin φ = 0 has exactly one root in (0, π)
        let phi = (-self.j_in).atan2(r * self.dj_in).rem_euclid(PI);
        (phi > 0.0).then(|| self.arclen_in + r * phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiTrace {
    pub samples: Vec<JacobiState>,
    pub caps: Vec<CapPassage>,
    /// `∫ j⁻² dℓ`; NaN when `j₀ = 0` or once the trace passes a cap.
    pub integral_inv_sq: f64,
    pub integral_j: f64,
    pub end: GeodesicState,
    pub exited: bool,
    pub(crate) sample_step: f64,
}

impl JacobiTrace {
    pub fn last(&self) -> &JacobiState {
        self.samples.last().expect("trace has samples")
    }

    /// `max |j″ + K j| / max |j|` from the five-point second difference on
    /// evenly spaced samples.
    pub fn residual(&self) -> f64 {
        let h = self.sample_step;
        let s = &self.samples;
        let mut worst: f64 = 0.0;
        for w in s.windows(5) {
            let even = w.windows(2).all(|p| (p[1].arclen - p[0].arclen - h).abs() <= 1e-9 * h);
            if !even {
                continue;
            }
            let d2 = (-w[4].j + 16.0 * w[3].j - 30.0 * w[2].j + 16.0 * w[1].j - w[0].j) / (12.0 * h * h);
            worst = worst.max((d2 + w[2].curvature * w[2].j).abs());
        }
        let scale = s.iter().map(|p| p.j.abs()).fold(0.0, f64::max);
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

fn cap_advance(y: &mut [f64; N], r: f64) {
    // over u = πR: j → −j, j′ → −j′, ∫ j gains 2R² j₀′
    let (j0, dj0) = (y[J], y[DJ]);
    y[INT_J] += 2.0 * r * r * dj0;
    y[J] = -j0;
    y[DJ] = -dj0;
}

/// Integrates `j″ = −K j` alongside the geodesic from `start` until it
/// exits (or reaches `target` arclength past the start). `∫ j⁻²` is only
/// accumulated when `j₀ ≠ 0`.
pub fn propagate_jacobi(
    surface: &SurfaceModel,
    start: &GeodesicState,
    init: (f64, f64),
    sample_step: Option<f64>,
    target: Option<f64>,
    opts: &TraceOptions,
) -> Result<JacobiTrace> {
    let step = sample_step.unwrap_or(SAMPLE_STEP);
    let req = DriveRequest {
        surface,
        opts,
        target: target.map(|l| start.arclen + l),
        sample_step: Some(step),
    };
    run(surface, &req, start, [init.0, init.1, 0.0, 0.0], step)
}

fn run(surface: &SurfaceModel, req: &DriveRequest<'_>, start: &GeodesicState, payload: [f64; 4], step: f64) -> Result<JacobiTrace> {
    let mut y0 = [0.0; N];
    y0[..4].copy_from_slice(&[start.t, start.x, start.v_t, start.v_x]);
    y0[4..].copy_from_slice(&payload);
    let mut samples = Vec::new();
    let mut caps = Vec::new();
    let tracking = Cell::new(payload[0] != 0.0);
    let extra = |y: &[f64; N], d: &mut [f64; N]| {
        d[J] = y[DJ];
        d[DJ] = -surface.band_curvature(y[0]) * y[J];
        d[INV_SQ] = if tracking.get() { 1.0 / (y[J] * y[J]) } else { 0.0 };
        d[INT_J] = y[J];
    };
    let on_cap = |y: &mut [f64; N], r: f64| {
        tracking.set(false);
        cap_advance(y, r);
    };
    let (stop, _) = driver::drive(req, y0, start.arclen, extra, on_cap, |o| match o {
        Observation::Sample { arclen, y, .. } => {
            if samples.last().is_some_and(|p: &JacobiState| arclen - p.arclen <= 1e-14) {
                samples.pop();
            }
            samples.push(JacobiState {
                arclen,
                t: y[0],
                x: y[1],
                v_t: y[2],
                v_x: y[3],
                j: y[J],
                dj: y[DJ],
                curvature: surface.band_curvature(y[0]),
            })
        }
        Observation::Junction {
            kind: JunctionKind::Cap,
            arclen_in,
            y_in,
            ..
        } => caps.push(CapPassage {
            arclen_in,
            radius: surface.cap_radius(),
            j_in: y_in[J],
            dj_in: y_in[DJ],
        }),
        Observation::Junction { .. } => {}
    })?;
    let (y, arclen, exited) = match stop {
        Stop::Exited { y, arclen } => (y, arclen, true),
        Stop::Reached { y, arclen } => (y, arclen, false),
        Stop::Cutoff { y, arclen } => (y, arclen, false),
    };
    Ok(JacobiTrace {
        samples,
        caps,
        integral_inv_sq: if tracking.get() { y[INV_SQ] } else { f64::NAN },
        integral_j: y[INT_J],
        end: driver::state_of(&y, arclen),
        exited,
        sample_step: step,
    })
}

/// Jacobi field along the geodesic entering at `bv`.
pub fn propagate_from_boundary(
    surface: &SurfaceModel,
    bv: &BoundaryVector,
    init: (f64, f64),
    sample_step: Option<f64>,
    opts: &TraceOptions,
) -> Result<JacobiTrace> {
    propagate_jacobi(surface, &initial_state(surface, bv)?, init, sample_step, None, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateReport {
    pub first: Option<f64>,
    pub trace: JacobiTrace,
    /// Minimum `|j|` after the initial zero, up to the first conjugate
    /// point or the exit.
    pub min_abs_j: f64,
}

/// Value of `j` at arclength `ell`, restarting from the sample `from`.
fn j_at(surface: &SurfaceModel, from: &JacobiState, ell: f64, opts: &TraceOptions) -> Result<f64> {
    let req = DriveRequest {
        surface,
        opts,
        target: Some(ell),
        sample_step: None,
    };
    let start = GeodesicState {
        t: from.t,
        x: from.x,
        v_t: from.v_t,
        v_x: from.v_x,
        arclen: from.arclen,
    };
    let tr = run(surface, &req, &start, [from.j, from.dj, 0.0, 0.0], f64::INFINITY)?;
    Ok(tr.last().j)
}

/// First zero of `j` after `ℓ = 0` for the field with `j(0) = 0`,
/// `j′(0) = 1`, bracketed by a sign change and bisected to
/// [`CONJUGATE_TOL`]. Cap zeros come from the closed form.
pub fn first_conjugate(surface: &SurfaceModel, bv: &BoundaryVector, opts: &TraceOptions) -> Result<ConjugateReport> {
    let start = initial_state(surface, bv)?;
    let trace = propagate_jacobi(surface, &start, (0.0, 1.0), Some(SAMPLE_STEP), None, opts)?;
    let s = &trace.samples;
    let mut band_zero = None;
    for k in 1..s.len().saturating_sub(1) {
        let (a, b) = (&s[k], &s[k + 1]);
        if a.j == 0.0 || a.j.signum() == b.j.signum() {
            continue;
        }
        // a cap lies between these samples when the arclength jumps
        if trace.caps.iter().any(|c| c.arclen_in >= a.arclen - 1e-14 && c.arclen_in < b.arclen) {
            continue;
        }
        let (mut lo, mut hi) = (a.arclen, b.arclen);
        while hi - lo > CONJUGATE_TOL {
            let mid = 0.5 * (lo + hi);
            if j_at(surface, a, mid, opts)?.signum() == a.j.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        band_zero = Some(0.5 * (lo + hi));
        break;
    }
    let cap_zero = trace.caps.iter().filter_map(CapPassage::zero).next();
    let first = match (band_zero, cap_zero) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let until = first.unwrap_or(f64::INFINITY);
    let min_abs_j = s
        .iter()
        .skip(1)
        .filter(|p| p.arclen <= until)
        .map(|p| p.j.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(ConjugateReport { first, trace, min_abs_j })
}

/// One perpendicular geodesic of the meridian fan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanRow {
    /// Boundary arclength of the foot point on component 0.
    pub theta: f64,
    pub integral_inv_sq: f64,
    pub integral_j: f64,
    pub first_conjugate: Option<f64>,
}

fn fan_surface(surface: &SurfaceModel) -> Result<()> {
    match surface.kind() {
        SurfaceKind::FlatCylinder | SurfaceKind::WarpedProduct => Ok(()),
        k => Err(Error::Unsupported(format!("{k:?} has no meridian fan across the band"))),
    }
}

/// Initial data of the fan variation field `∂_s` along a meridian, with `s`
/// the boundary arclength: `j = 1`, `j′ = inward·F′/F` at the foot.
pub fn fan_init(surface: &SurfaceModel) -> Result<(f64, f64)> {
    let c = surface.component(0)?;
    let w = surface.warp(c.t);
    Ok((1.0, c.inward * w.df / w.f))
}

/// `∫ j⁻² dℓ` and `∫ j dℓ` along each meridian of the fan rooted at the
/// boundary arclengths `thetas` on component 0.
pub fn inverse_square_functional(surface: &SurfaceModel, thetas: &[f64], opts: &TraceOptions) -> Result<Vec<FanRow>> {
    fan_surface(surface)?;
    let init = fan_init(surface)?;
    thetas
        .par_iter()
        .map(|&th| {
            let bv = BoundaryVector::new(0, th, 0.0);
            let tr = propagate_from_boundary(surface, &bv, init, None, opts)?;
            if !tr.exited {
                return Err(Error::Numeric(format!("fan meridian at {th} did not cross")));
            }
            if let Some(p) = tr.samples.iter().find(|p| p.j <= 0.0) {
                return Err(Error::Numeric(format!(
                    "fan field vanishes at arclength {} on meridian {th}",
                    p.arclen
                )));
            }
            Ok(FanRow {
                theta: th,
                integral_inv_sq: tr.integral_inv_sq,
                integral_j: tr.integral_j,
                first_conjugate: first_conjugate(surface, &bv, opts)?.first,
            })
        })
        .collect()
}

pub fn write_fan_csv<W: Write>(rows: &[FanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "integral_inv_sq", "integral_j", "first_conjugate"])?;
    for r in rows {
        w.write_record([
            r.theta.to_string(),
            r.integral_inv_sq.to_string(),
            r.integral_j.to_string(),
            r.first_conjugate.map_or(String::new(), |l| l.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanArea {
    pub fan_integral: f64,
    pub direct_area: f64,
}

impl FanArea {
    pub fn relative_diff(&self) -> f64 {
        (self.fan_integral - self.direct_area).abs() / self.direct_area
    }
}

/// `∫∫ j dℓ ds` over the fan (midpoint rule in `s`) against the area.
pub fn area_via_fan(surface: &SurfaceModel, n: usize, opts: &TraceOptions) -> Result<FanArea> {
    if n == 0 {
        return Err(Error::InvalidInput("fan needs at least one meridian".into()));
    }
    let len = surface.component(0)?.length;
    let h = len / n as f64;
    let thetas: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * h).collect();
    let rows = inverse_square_functional(surface, &thetas, opts)?;
    Ok(FanArea {
        fan_integral: h * rows.iter().map(|r| r.integral_j).sum::<f64>(),
        direct_area: surface.area(),
    })
}

/// Normalized separation of the two boundary neighbors at `θ ± Δθ`,
/// measured along the unit normal at the arclengths `at`. With `s` fixed,
/// this is the field with `j(0) = 0`, `j′(0) = 1`.
pub fn finite_difference_field(
    surface: &SurfaceModel,
    bv: &BoundaryVector,
    dtheta: f64,
    at: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<f64>> {
    let side = |sign: f64| -> Result<Vec<GeodesicState>> {
        let b = BoundaryVector::new(bv.component, bv.s, bv.theta + sign * dtheta);
        let st = initial_state(surface, &b)?;
        at.iter()
            .map(|&l| {
                crate::flow::integrate_to_arclength(surface, &st, l, opts)?
                    .ok_or_else(|| Error::Numeric(format!("neighbor left before arclength {l}")))
            })
            .collect()
    };
    let (p, m) = (side(1.0)?, side(-1.0)?);
    let inward = surface.component(bv.component)?.inward;
    let c = surface.circumference();
    let centre = initial_state(surface, bv)?;
    at.iter()
        .zip(p.iter().zip(&m))
        .map(|(&l, (a, b))| {
            let mid = crate::flow::integrate_to_arclength(surface, &centre, l, opts)?
                .ok_or_else(|| Error::Numeric("reference left early".into()))?;
            let f = surface.warp(mid.t).f;
            let dx = (a.x - b.x) - c * ((a.x - b.x) / c).round();
            // component along the unit normal N = (−F v_x, v_t / F)
            let sep = (a.t - b.t) * (-f * mid.v_x) + dx * f * f * (mid.v_t / f);
            Ok(inward * sep / (2.0 * dtheta))
        })
        .collect()
}
