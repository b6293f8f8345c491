use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{exit_of, initial_state, integrate_to_arclength, trace_from_state, GeodesicState, TraceOptions, TraceStatus};
use crate::lens::BoundaryVector;
use crate::surface::{SurfaceKind, SurfaceModel};

/// `θ_k = kπ/(n − 1)`, `k = 0..n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 * PI / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport {
    pub thetas: Vec<f64>,
    /// Liouville average `Θ(θ)` of the intersection angle after the scattering
    /// identification.
    pub means: Vec<f64>,
    pub samples: usize,
    /// Draws dropped because the geodesic is trapped both ways.
    pub skipped: usize,
}

impl AngleReport {
    pub fn max_deviation(&self) -> f64 {
        self.thetas
            .iter()
            .zip(&self.means)
            .map(|(t, m)| (t - m).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|Θ(π − θ) − (π − Θ(θ))|` over the symmetric grid.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.means.len();
        (0..n)
            .map(|k| (self.means[n - 1 - k] - (PI - self.means[k])).abs())
            .fold(0.0, f64::max)
    }
}

/// The boundary vector of the geodesic through `v`, and the arclength from
/// it to `v`. `flipped` marks a geodesic running through `v` backwards
/// (used when `v` is backward trapped).
struct Anchor {
    start: GeodesicState,
    ell: f64,
    flipped: bool,
}

fn anchor(surface: &SurfaceModel, v: &GeodesicState, opts: &TraceOptions) -> Result<Option<Anchor>> {
    for (probe, flipped) in [(v.reversed(), false), (*v, true)] {
        let r = trace_from_state(surface, &GeodesicState { arclen: 0.0, ..probe }, opts)?;
        if let (TraceStatus::Exited, Some(e)) = (r.status, r.exit) {
            let out = exit_of(surface, &e.state)?;
            let bv = BoundaryVector::new(out.component, out.s, -out.theta);
            return Ok(Some(Anchor {
                start: initial_state(surface, &bv)?,
                ell: e.state.arclen,
                flipped,
            }));
        }
    }
    Ok(None)
}

fn wrap(dx: f64, c: f64) -> f64 {
    dx - c * (dx / c).round()
}

/// Meets the two anchored geodesics by Newton iteration on `(ℓ₁, ℓ₂)` and
/// returns the oriented angle between them there.
fn meet(surface: &SurfaceModel, a: &Anchor, b: &Anchor, opts: &TraceOptions) -> Result<f64> {
    let (mut l1, mut l2) = (a.ell, b.ell);
    let c = surface.circumference();
    let lost = || Error::Numeric("geodesic left the surface during the intersection search".into());
    for _ in 0..8 {
        let p = integrate_to_arclength(surface, &a.start, l1, opts)?.ok_or_else(lost)?;
        let q = integrate_to_arclength(surface, &b.start, l2, opts)?.ok_or_else(lost)?;
        let r = [p.t - q.t, wrap(p.x - q.x, c)];
        let sign = |f: bool| if f { -1.0 } else { 1.0 };
        let (s1, s2) = (sign(a.flipped), sign(b.flipped));
        if r[0].abs().max(r[1].abs()) <= 1e-14 {
            let f = surface.warp(p.t).f;
            let (u, w) = ([s1 * p.v_t, s1 * p.v_x], [s2 * q.v_t, s2 * q.v_x]);
            return Ok((f * (u[0] * w[1] - u[1] * w[0])).atan2(u[0] * w[0] + f * f * u[1] * w[1]));
        }
        // J = [∂P/∂ℓ₁, −∂Q/∂ℓ₂]
        let (j11, j12, j21, j22) = (p.v_t, -q.v_t, p.v_x, -q.v_x);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return Err(Error::Numeric("geodesics are parallel at the intersection".into()));
        }
        l1 -= (j22 * r[0] - j12 * r[1]) / det;
        l2 -= (-j21 * r[0] + j11 * r[1]) / det;
    }
    Err(Error::Numeric("intersection search did not converge".into()))
}

fn sample_point(surface: &SurfaceModel, rng: &mut ChaCha8Rng) -> GeodesicState {
    let f_max = (0..=256)
        .map(|k| surface.warp(surface.t_min() + surface.width() * k as f64 / 256.0).f)
        .fold(0.0, f64::max)
        * 1.01;
    let t = loop {
        let t = surface.t_min() + surface.width() * rng.gen::<f64>();
        if rng.gen::<f64>() * f_max <= surface.warp(t).f {
            break t;
        }
    };
    let x = surface.circumference() * rng.gen::<f64>();
    let alpha = PI * (2.0 * rng.gen::<f64>() - 1.0);
    GeodesicState::from_angle(surface, t, x, alpha)
}

/// Averages the intersection angle of the scattering-identified pair
/// `(γ_v, γ_{R_θ v})` over Liouville-distributed `v`, for each `θ`.
///
/// The pair is rebuilt from boundary data alone: each geodesic is traced
/// back to its inward boundary vector and the intersection is found again
/// by Newton iteration. `Θ(0) = 0` and `Θ(π) = π` by definition.
pub fn average_angle_identity(surface: &SurfaceModel, thetas: &[f64], samples: usize, seed: u64, opts: &TraceOptions) -> Result<AngleReport> {
    if surface.kind() == SurfaceKind::CappedCylinder {
        return Err(Error::Unsupported("angle identity needs a single band chart".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let opts = &opts.without_polyline();
    let per: Vec<Option<Vec<f64>>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let v = sample_point(surface, &mut rng);
            let Some(a) = anchor(surface, &v, opts)? else {
                return Ok(None);
            };
            let f = surface.warp(v.t).f;
            let alpha = (f * v.v_x).atan2(v.v_t);
            let mut out = Vec::with_capacity(thetas.len());
            for &th in thetas {
                if th <= 0.0 || th >= PI {
                    out.push(th.clamp(0.0, PI));
                    continue;
                }
                let w = GeodesicState::from_angle(surface, v.t, v.x, alpha + th);
                let Some(b) = anchor(surface, &w, opts)? else {
                    return Ok(None);
                };
                out.push(meet(surface, &a, &b, opts)?);
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;
    let kept: Vec<&Vec<f64>> = per.iter().flatten().collect();
    if kept.is_empty() {
        return Err(Error::Numeric("every sample was trapped".into()));
    }
    let means = (0..thetas.len())
        .map(|j| kept.iter().map(|r| r[j]).sum::<f64>() / kept.len() as f64)
        .collect();
    Ok(AngleReport {
        thetas: thetas.to_vec(),
        means,
        samples: kept.len(),
        skipped: samples - kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = theta_grid(32);
        assert_eq!(g.len(), 32);
        assert_eq!(g[0], 0.0);
        assert!((g[31] - PI).abs() < 1e-15);
        assert!((g[10] + g[21] - PI).abs() < 1e-15);
    }

    #[test]
    fn flat_band_recovers_the_angle() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let r = average_angle_identity(&flat, &theta_grid(8), 16, 1, &TraceOptions::default()).unwrap();
        assert!(r.max_deviation() < 1e-10, "{r:?}");
        assert!(r.symmetry_defect() < 1e-10);
    }
}
