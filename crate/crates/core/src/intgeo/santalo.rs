use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::MeasureEstimate;
use crate::error::{Error, Result};
use crate::flow::{trace_from_boundary, TraceOptions, TraceStatus};
use crate::lens::BoundaryVector;
use crate::quad::{self, QuadOptions};
use crate::surface::SurfaceModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SantaloReport {
    /// `∫_{∂M} ∫ TT(s, θ) cos θ dθ ds`.
    pub boundary: MeasureEstimate,
    /// `2π · Area(M)`.
    pub phase_volume: f64,
    /// Integrand evaluations that did not exit (counted as zero).
    pub trapped_evals: usize,
}

impl SantaloReport {
    pub fn relative_diff(&self) -> f64 {
        (self.boundary.value - self.phase_volume).abs() / self.phase_volume
    }
}

/// Entry angles where the travel time blows up: the boundary geodesics
/// asymptotic to a minimal parallel.
fn critical_angles(surface: &SurfaceModel, t_b: f64) -> Vec<f64> {
    let Some(p) = surface.profile() else {
        return Vec::new();
    };
    let mut cands: Vec<f64> = (0..=2048)
        .map(|k| surface.t_min() + surface.width() * k as f64 / 2048.0)
        .collect();
    cands.extend(p.breakpoints());
    let f_min = cands
        .into_iter()
        .filter(|t| *t >= surface.t_min() && *t <= surface.t_max())
        .map(|t| p.eval(t).f)
        .fold(f64::INFINITY, f64::min);
    let f_b = p.eval(t_b).f;
    if f_min < f_b * (1.0 - 1e-12) {
        let th = (f_min / f_b).asin();
        vec![-th, th]
    } else {
        Vec::new()
    }
}

/// Santaló's formula: the Liouville-weighted travel time over the inward
/// boundary equals `2π·Area` when the trapped set is null.
///
/// Midpoint rule with `n_s` nodes in `s`; adaptive Gauss–Kronrod in `θ`
/// with breakpoints at the critical angles.
pub fn santalo_check(surface: &SurfaceModel, n_s: usize, rel_tol: f64, opts: &TraceOptions) -> Result<SantaloReport> {
    if n_s == 0 {
        return Err(Error::InvalidInput("n_s must be positive".into()));
    }
    let opts = opts.without_polyline();
    let rows: Vec<(usize, f64, f64, f64)> = surface
        .boundary()
        .components
        .iter()
        .flat_map(|c| {
            let h = c.length / n_s as f64;
            (0..n_s).map(move |j| (c.id, (j as f64 + 0.5) * h, h, c.t))
        })
        .collect();
    let parts: Vec<(f64, f64, usize, usize)> = rows
        .par_iter()
        .map(|&(id, s, h, t_b)| {
            let failure = RefCell::new(None);
            let mut trapped = 0usize;
            let r = quad::integrate(
                |th: f64| {
                    let bv = BoundaryVector::new(id, s, th);
                    match trace_from_boundary(surface, &bv, &opts) {
                        Ok(tr) if tr.status == TraceStatus::Exited => tr.travel_time.unwrap_or(0.0) * th.cos(),
                        Ok(_) => {
                            trapped += 1;
                            0.0
                        }
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                -FRAC_PI_2,
                FRAC_PI_2,
                &critical_angles(surface, t_b),
                QuadOptions {
                    abs_tol: 1e-13,
                    rel_tol,
                    max_intervals: 4000,
                },
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok((h * r.value, h * r.error, r.evals, trapped))
        })
        .collect::<Result<_>>()?;
    let value = parts.iter().map(|p| p.0).sum();
    let error = parts.iter().map(|p| p.1).sum();
    Ok(SantaloReport {
        boundary: MeasureEstimate {
            value,
            error,
            samples: parts.iter().map(|p| p.2).sum(),
            seed: None,
        },
        phase_volume: 2.0 * PI * surface.area(),
        trapped_evals: parts.iter().map(|p| p.3).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_band_is_exact() {
        // TT·cos θ ≡ width, so both sides are 2π·C·width
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let r = santalo_check(&flat, 2, 1e-12, &TraceOptions::default()).unwrap();
        assert!((r.boundary.value - 4.0 * PI * PI).abs() < 1e-9, "{r:?}");
        assert!(r.relative_diff() < 1e-12);
    }

    #[test]
    fn cosh_critical_angles() {
        let cosh = SurfaceModel::cosh_cylinder();
        let a = critical_angles(&cosh, -1.0);
        assert!((a[1] - (1.0 / 1f64.cosh()).asin()).abs() < 1e-14);
        assert!(critical_angles(&SurfaceModel::flat_cylinder(0.0, 1.0).unwrap(), 0.0).is_empty());
    }
}
