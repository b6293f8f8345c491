use std::f64::consts::PI;

use rayon::prelude::*;

use super::MeasureEstimate;
use crate::error::{Error, Result};
use crate::flow::{classify_trapped, GeodesicState, TraceOptions, TrapVerdict};
use crate::surface::SurfaceModel;

/// A direction interval `[lo, hi]` (angles from `+∂t`, `hi` may exceed `π`)
/// that contains forward-trapped directions or a change of exit component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Verdict at the bracket midpoint.
    pub center_verdict: TrapVerdict,
}

impl Bracket {
    pub fn center(&self) -> f64 {
        let c = 0.5 * (self.lo + self.hi);
        (c + PI).rem_euclid(2.0 * PI) - PI
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrappedMeasure {
    /// Upper bound for `|TG(p)|`: twice the total bracket width
    /// (forward plus backward trapped directions).
    pub bound: MeasureEstimate,
    pub brackets: Vec<Bracket>,
    pub trapped_nodes: usize,
}

/// Sweeps `n` directions `α_k = −π + (k + ½)·2π/n` at the interior point
/// `(t0, x0)` and brackets the trapped set between consecutive exiting
/// directions.
pub fn trapped_measure(surface: &SurfaceModel, t0: f64, x0: f64, n: usize, opts: &TraceOptions) -> Result<TrappedMeasure> {
    if !(t0 > surface.t_min() && t0 < surface.t_max()) {
        return Err(Error::Domain { t: t0, t_min: surface.t_min(), t_max: surface.t_max() });
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two directions".into()));
    }
    let step = 2.0 * PI / n as f64;
    let alpha = |k: usize| -PI + (k as f64 + 0.5) * step;
    let verdicts: Vec<TrapVerdict> = (0..n)
        .into_par_iter()
        .map(|k| classify_trapped(surface, &GeodesicState::from_angle(surface, t0, x0, alpha(k)), opts))
        .collect::<Result<_>>()?;
    let exits: Vec<(usize, usize)> = verdicts
        .iter()
        .enumerate()
        .filter_map(|(k, v)| match v {
            TrapVerdict::Exits { component } => Some((k, *component)),
            _ => None,
        })
        .collect();
    let trapped_nodes = n - exits.len();
    let center_verdict = |lo: f64, hi: f64| {
        classify_trapped(surface, &GeodesicState::from_angle(surface, t0, x0, 0.5 * (lo + hi)), opts)
    };
    let mut brackets = Vec::new();
    if exits.is_empty() {
        brackets.push(Bracket {
            lo: -PI,
            hi: PI,
            center_verdict: center_verdict(-PI, PI)?,
        });
    } else {
        for (m, &(i, ci)) in exits.iter().enumerate() {
            let (j, cj) = exits[(m + 1) % exits.len()];
            let gap = (j + n - i) % n;
            let gap = if gap == 0 { n } else { gap };
            if ci != cj || gap > 1 {
                let lo = alpha(i);
                let hi = lo + gap as f64 * step;
                brackets.push(Bracket {
                    lo,
                    hi,
                    center_verdict: center_verdict(lo, hi)?,
                });
            }
        }
    }
    let width: f64 = brackets.iter().map(Bracket::width).sum();
    Ok(TrappedMeasure {
        bound: MeasureEstimate {
            value: 2.0 * width,
            error: 2.0 * step * brackets.len() as f64,
            samples: n,
            seed: None,
        },
        brackets,
        trapped_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_band_brackets_the_horizontal_directions() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let n = 1000;
        let r = trapped_measure(&flat, 0.5, 0.0, n, &TraceOptions::default()).unwrap();
        assert_eq!(r.brackets.len(), 2);
        assert!(r.bound.value <= 4.0 * 2.0 * PI / n as f64 + 1e-12);
        for b in &r.brackets {
            assert!((b.center().abs() - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosh_waist_is_totally_trapped_at_the_brackets() {
        let cosh = SurfaceModel::cosh_cylinder();
        let r = trapped_measure(&cosh, 0.0, 0.0, 400, &TraceOptions::default()).unwrap();
        assert_eq!(r.brackets.len(), 2);
        assert!(r.brackets.iter().all(|b| b.center_verdict == TrapVerdict::TotallyTrapped));
    }

    #[test]
    fn rejects_boundary_points() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!(trapped_measure(&flat, 0.0, 0.0, 10, &TraceOptions::default()).is_err());
    }
}
