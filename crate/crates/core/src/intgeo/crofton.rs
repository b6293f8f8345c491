use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::count::{count_circle, count_intersections, count_meridian};
use super::MeasureEstimate;
use crate::error::{Error, Result};
use crate::flow::clairaut::{find_turning, Turning};
use crate::flow::{classify_trapped, trace_from_boundary, GeodesicPolyline, GeodesicState, TraceOptions, TraceStatus, TrapVerdict};
use crate::lens::BoundaryVector;
use crate::quad::gauss_legendre;
use crate::surface::{SurfaceKind, SurfaceModel};

/// Test curves for the Crofton identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSpec {
    /// The parallel circle `t = t`.
    Circle { t: f64 },
    /// The meridian segment `x = x, t ∈ [t0, t1]`.
    Meridian { x: f64, t0: f64, t1: f64 },
}

impl CurveSpec {
    pub fn length(&self, surface: &SurfaceModel) -> f64 {
        match *self {
            CurveSpec::Circle { t } => surface.warp(t).f * surface.circumference(),
            CurveSpec::Meridian { t0, t1, .. } => (t1 - t0).abs(),
        }
    }

    fn validate(&self, surface: &SurfaceModel) -> Result<()> {
        let inside = |t: f64| t > surface.t_min() && t < surface.t_max();
        let ok = match *self {
            CurveSpec::Circle { t } => inside(t),
            CurveSpec::Meridian { t0, t1, .. } => {
                t0 >= surface.t_min() && t1 <= surface.t_max() && t0 < t1
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{self:?} is not inside the band")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CroftonGrid {
    pub n_s: usize,
    pub n_theta: usize,
    pub n_tau: usize,
    pub n_phi: usize,
}

impl Default for CroftonGrid {
    fn default() -> Self {
        Self {
            n_s: 256,
            n_theta: 256,
            n_tau: 64,
            n_phi: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CroftonReport {
    /// `∫_Γ i(C, τ) dτ`.
    pub lhs: MeasureEstimate,
    /// `∫_C ∫_{G(p)} |cos φ| dφ dl`.
    pub rhs: MeasureEstimate,
    pub length: f64,
    /// Boundary nodes whose count could not be taken (trapped or tangential).
    pub flagged: usize,
}

impl CroftonReport {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs.value - self.rhs.value).abs()
    }
}

/// Clairaut crossing count of the circle `t = level`: a crossing geodesic
/// meets it once; a turning one twice when the level lies before the
/// turning point, else never.
fn warped_circle(surface: &SurfaceModel, bv: &BoundaryVector, level: f64) -> Result<Option<usize>> {
    let p = surface.profile().copied().expect("warped surface");
    let c = surface.component(bv.component)?;
    if bv.theta.abs() >= FRAC_PI_2 {
        return Ok(None);
    }
    let a = (surface.warp(c.t).f * bv.theta.sin()).abs();
    let end = if c.inward > 0.0 { surface.t_max() } else { surface.t_min() };
    let between = |lo: f64, hi: f64| level > lo.min(hi) && level < lo.max(hi);
    Ok(match find_turning(&p, c.t, end, a) {
        Turning::None => Some(usize::from(between(c.t, end))),
        Turning::Transversal(ts) => Some(if between(c.t, ts) { 2 } else { 0 }),
        Turning::Asymptotic(_) => None,
    })
}

fn crossings(surface: &SurfaceModel, curve: &CurveSpec, bv: &BoundaryVector, opts: &TraceOptions) -> Result<Option<usize>> {
    if let (CurveSpec::Circle { t }, SurfaceKind::WarpedProduct) = (curve, surface.kind()) {
        return warped_circle(surface, bv, *t);
    }
    let r = trace_from_boundary(surface, bv, opts)?;
    if r.status != TraceStatus::Exited {
        return Ok(None);
    }
    let rep = match *curve {
        CurveSpec::Circle { t } => count_circle(&r.polyline, t)?,
        CurveSpec::Meridian { x, t0, t1 } => count_meridian(&r.polyline, x, t0, t1, surface.circumference())?,
    };
    Ok(rep.is_clean().then_some(rep.count))
}

/// Both the Crofton sides for `curve`.
///
/// The boundary side uses the midpoint rule in `s` and Gauss–Legendre in
/// `θ`; its error bound is the quadrature mass of the nodes adjacent to a
/// jump of the count. The curve side uses Gauss–Legendre in the curve
/// parameter and on the two half-circles of directions, with the
/// non-trapped indicator from [`classify_trapped`].
pub fn crofton_check(surface: &SurfaceModel, curve: &CurveSpec, grid: &CroftonGrid, opts: &TraceOptions) -> Result<CroftonReport> {
    curve.validate(surface)?;
    if grid.n_s == 0 || grid.n_theta == 0 || grid.n_tau == 0 || grid.n_phi < 2 {
        return Err(Error::InvalidInput("empty Crofton grid".into()));
    }
    let opts = &TraceOptions {
        polyline: true,
        ..*opts
    };
    let theta = gauss_legendre(grid.n_theta, -FRAC_PI_2, FRAC_PI_2);
    let comps = surface.boundary().components;

    // boundary side
    let rows: Vec<(usize, f64, usize)> = comps
        .iter()
        .flat_map(|c| {
            let h = c.length / grid.n_s as f64;
            (0..grid.n_s).map(move |j| (c.id, h, j))
        })
        .collect();
    let counts: Vec<Vec<Option<usize>>> = rows
        .par_iter()
        .map(|&(id, h, j)| {
            let s = (j as f64 + 0.5) * h;
            theta
                .iter()
                .map(|&(th, _)| crossings(surface, curve, &BoundaryVector::new(id, s, th), opts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut lhs = 0.0;
    let mut bound = 0.0;
    let mut flagged = 0;
    let max_count = counts.iter().flatten().flatten().copied().max().unwrap_or(0) as f64;
    for (r, &(_, h, _)) in counts.iter().zip(&rows) {
        for (k, (&(th, w), n)) in theta.iter().zip(r).enumerate() {
            let mass = h * w * th.cos();
            match n {
                Some(n) => lhs += mass * *n as f64,
                None => {
                    flagged += 1;
                    bound += mass * max_count.max(1.0);
                }
            }
            if k + 1 < theta.len() {
                if let (Some(a), Some(b)) = (n, r[k + 1]) {
                    if *a != b {
                        let (th2, w2) = theta[k + 1];
                        bound += h * (w * th.cos() + w2 * th2.cos()) * (*a as f64 - b as f64).abs();
                    }
                }
            }
        }
    }
    // jumps in s (cyclic within each component)
    for (i, r) in counts.iter().enumerate() {
        let (id, h, j) = rows[i];
        let next = if j + 1 == grid.n_s { i + 1 - grid.n_s } else { i + 1 };
        debug_assert_eq!(rows[next].0, id);
        for (k, &(th, w)) in theta.iter().enumerate() {
            if let (Some(a), Some(b)) = (r[k], counts[next][k]) {
                if a != b {
                    bound += h * w * th.cos() * (a as f64 - b as f64).abs();
                }
            }
        }
    }

    // curve side
    let (tau, place): (Vec<(f64, f64)>, Box<dyn Fn(f64) -> (f64, f64, f64, f64) + Sync>) = match *curve {
        CurveSpec::Circle { t } => {
            let f = surface.warp(t).f;
            (
                gauss_legendre(grid.n_tau, 0.0, surface.circumference()),
                Box::new(move |u| (t, u, 0.0, f)),
            )
        }
        CurveSpec::Meridian { x, t0, t1 } => (gauss_legendre(grid.n_tau, t0, t1), Box::new(move |u| (u, x, FRAC_PI_2, 1.0))),
    };
    let half = grid.n_phi / 2;
    let mut phi = gauss_legendre(half, -FRAC_PI_2, FRAC_PI_2);
    phi.extend(gauss_legendre(half, FRAC_PI_2, 3.0 * FRAC_PI_2));
    let per_tau: Vec<(f64, f64)> = tau
        .par_iter()
        .map(|&(u, wu)| {
            let (t, x, base, dl) = place(u);
            let open = |alpha: f64| -> Result<bool> {
                let st = GeodesicState::from_angle(surface, t, x, alpha);
                let fwd = classify_trapped(surface, &st, opts)?;
                let bwd = classify_trapped(surface, &st.reversed(), opts)?;
                Ok(matches!(fwd, TrapVerdict::Exits { .. }) && matches!(bwd, TrapVerdict::Exits { .. }))
            };
            let g = phi.iter().map(|&(p, _)| open(base + p)).collect::<Result<Vec<_>>>()?;
            let mut val = 0.0;
            let mut err = 0.0;
            for (k, (&(p, w), &gk)) in phi.iter().zip(&g).enumerate() {
                if gk {
                    val += w * p.cos().abs();
                }
                if k + 1 < phi.len() && k + 1 != half && g[k + 1] != gk {
                    let (p2, w2) = phi[k + 1];
                    err += w * p.cos().abs() + w2 * p2.cos().abs();
                }
            }
            Ok((wu * dl * val, wu * dl * err))
        })
        .collect::<Result<_>>()?;
    let rhs = per_tau.iter().map(|p| p.0).sum();
    let rhs_err = per_tau.iter().map(|p| p.1).sum();
    let n_lhs = rows.len() * theta.len();
    Ok(CroftonReport {
        lhs: MeasureEstimate {
            value: lhs,
            error: bound,
            samples: n_lhs,
            seed: None,
        },
        rhs: MeasureEstimate {
            value: rhs,
            error: rhs_err,
            samples: tau.len() * phi.len(),
            seed: None,
        },
        length: curve.length(surface),
        flagged,
    })
}

/// Samples per RNG stream in [`length_via_crofton`].
pub const LENGTH_CHUNK: usize = 4096;

/// Draws from the Liouville measure `|cos θ| dθ ds`, normalized.
pub(super) fn draw(rng: &mut ChaCha8Rng, lengths: &[f64], total: f64) -> BoundaryVector {
    let mut pick = rng.gen::<f64>() * total;
    let mut comp = lengths.len() - 1;
    for (k, &l) in lengths.iter().enumerate() {
        if pick < l {
            comp = k;
            break;
        }
        pick -= l;
    }
    let s = rng.gen::<f64>() * lengths[comp];
    let theta = (2.0 * rng.gen::<f64>() - 1.0).asin();
    BoundaryVector::new(comp, s, theta)
}

/// Monte Carlo length of a traced geodesic from `4·L = ∫_Γ i(γ, τ) dτ`.
///
/// Each chunk of [`LENGTH_CHUNK`] samples uses its own ChaCha8 stream of
/// `seed`; chunks are reduced in order, so the estimate does not depend on
/// the thread count. Samples whose count is flagged are redrawn.
pub fn length_via_crofton(
    surface: &SurfaceModel,
    gamma: &GeodesicPolyline,
    samples: usize,
    seed: u64,
    opts: &TraceOptions,
) -> Result<MeasureEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    gamma.validate()?;
    let lengths = surface.boundary().lengths();
    let total: f64 = lengths.iter().sum();
    let measure = 2.0 * total;
    let opts = &TraceOptions {
        polyline: true,
        ..*opts
    };
    let chunks = samples.div_ceil(LENGTH_CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = LENGTH_CHUNK.min(samples - c * LENGTH_CHUNK);
            let (mut sum, mut sq) = (0.0, 0.0);
            let mut taken = 0;
            let mut redraws = 0;
            while taken < n {
                let bv = draw(&mut rng, &lengths, total);
                let r = trace_from_boundary(surface, &bv, opts)?;
                let rep = if r.status == TraceStatus::Exited {
                    Some(count_intersections(surface, gamma, &r.polyline)?)
                } else {
                    None
                };
                match rep {
                    Some(rep) if rep.is_clean() => {
                        let i = rep.count as f64;
                        sum += i;
                        sq += i * i;
                        taken += 1;
                    }
                    _ => {
                        redraws += 1;
                        if redraws > 100 * n {
                            return Err(Error::Numeric("too many flagged samples".into()));
                        }
                    }
                }
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let (sum, sq) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MeasureEstimate {
        value: measure * mean / 4.0,
        error: measure * (var / n).sqrt() / 4.0,
        samples,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small() -> CroftonGrid {
        CroftonGrid {
            n_s: 64,
            n_theta: 64,
            n_tau: 8,
            n_phi: 64,
        }
    }

    #[test]
    fn flat_circle_small_grid() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let r = crofton_check(&flat, &CurveSpec::Circle { t: 0.5 }, &small(), &TraceOptions::default()).unwrap();
        assert!((r.rhs.value - 8.0 * PI).abs() < 1e-10, "{r:?}");
        assert!((r.lhs.value - 8.0 * PI).abs() < 1e-10, "{r:?}");
        assert_eq!(r.flagged, 0);
    }

    #[test]
    fn curve_outside_band_is_rejected() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!(crofton_check(&flat, &CurveSpec::Circle { t: 2.0 }, &small(), &TraceOptions::default()).is_err());
    }

    #[test]
    fn warped_circle_counts_match_traces() {
        let cosh = SurfaceModel::cosh_cylinder();
        let opts = TraceOptions::default().with_method(crate::flow::TraceMethod::Ode);
        for &(th, level) in &[(0.3, 0.2), (1.2, -0.9), (1.2, 0.5), (-1.3, -0.95), (0.9, 0.0)] {
            let bv = BoundaryVector::new(0, 0.4, th);
            let quick = warped_circle(&cosh, &bv, level).unwrap().unwrap();
            let r = trace_from_boundary(&cosh, &bv, &opts).unwrap();
            assert_eq!(quick, count_circle(&r.polyline, level).unwrap().count, "{th} {level}");
        }
    }

    #[test]
    fn length_estimate_is_reproducible() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let opts = TraceOptions::default();
        let g = trace_from_boundary(&flat, &BoundaryVector::new(0, 1.0, 0.0), &opts).unwrap();
        let a = length_via_crofton(&flat, &g.polyline, 5000, 7, &opts).unwrap();
        let b = length_via_crofton(&flat, &g.polyline, 5000, 7, &opts).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.0).abs() < 4.0 * a.error, "{a:?}");
    }
}
