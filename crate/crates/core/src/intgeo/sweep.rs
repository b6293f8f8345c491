use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::count::count_intersections;
use super::crofton::draw;
use crate::error::{Error, Result};
use crate::flow::{trace_from_boundary, GeodesicPolyline, TraceOptions, TraceStatus};
use crate::lens::BoundaryVector;
use crate::surface::SurfaceModel;

/// One `(γ, τ)` pair counted on both surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceSample {
    pub gamma: BoundaryVector,
    pub tau: BoundaryVector,
    pub i_a: Option<usize>,
    pub i_b: Option<usize>,
}

impl DifferenceSample {
    /// `i(γ, τ) − i₁(γ₁, τ₁)`, when both counts are clean.
    pub fn diff(&self) -> Option<i64> {
        Some(self.i_a? as i64 - self.i_b? as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceReport {
    pub samples: Vec<DifferenceSample>,
    /// Pairs drawn again because a count was flagged or a trace was trapped.
    pub redrawn: usize,
}

impl DifferenceReport {
    /// Histogram of the observed differences.
    pub fn histogram(&self) -> BTreeMap<i64, usize> {
        let mut h = BTreeMap::new();
        for d in self.samples.iter().filter_map(DifferenceSample::diff) {
            *h.entry(d).or_insert(0) += 1;
        }
        h
    }

    /// Pairs whose difference is not `expected`.
    pub fn exceptions(&self, expected: i64) -> Vec<DifferenceSample> {
        self.samples
            .iter()
            .filter(|s| s.diff() != Some(expected))
            .copied()
            .collect()
    }
}

fn same_boundary(a: &SurfaceModel, b: &SurfaceModel) -> Result<()> {
    let (la, lb) = (a.boundary().lengths(), b.boundary().lengths());
    let same = la.len() == lb.len() && la.iter().zip(&lb).all(|(x, y)| (x - y).abs() <= 1e-12 * x.max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::Incomparable(format!("boundary lengths {la:?} and {lb:?} differ")))
    }
}

fn traced(surface: &SurfaceModel, bv: &BoundaryVector, opts: &TraceOptions) -> Result<Option<GeodesicPolyline>> {
    let r = trace_from_boundary(surface, bv, opts)?;
    Ok((r.status == TraceStatus::Exited).then_some(r.polyline))
}

fn clean_count(surface: &SurfaceModel, g: &GeodesicPolyline, t: &GeodesicPolyline) -> Result<Option<usize>> {
    let r = count_intersections(surface, g, t)?;
    Ok(r.is_clean().then_some(r.count))
}

/// Counts `i(γ, τ)` on `a` and `i₁(γ, τ)` on `b` for each `τ`, with boundary
/// vectors identified through the shared boundary.
pub fn intersection_difference(
    a: &SurfaceModel,
    b: &SurfaceModel,
    gamma: &BoundaryVector,
    taus: &[BoundaryVector],
    opts: &TraceOptions,
) -> Result<Vec<DifferenceSample>> {
    same_boundary(a, b)?;
    let opts = &TraceOptions {
        polyline: true,
        ..*opts
    };
    let ga = traced(a, gamma, opts)?;
    let gb = traced(b, gamma, opts)?;
    taus.par_iter()
        .map(|tau| {
            let count = |s: &SurfaceModel, g: &Option<GeodesicPolyline>| -> Result<Option<usize>> {
                match (g, traced(s, tau, opts)?) {
                    (Some(g), Some(t)) => clean_count(s, g, &t),
                    _ => Ok(None),
                }
            };
            Ok(DifferenceSample {
                gamma: *gamma,
                tau: *tau,
                i_a: count(a, &ga)?,
                i_b: count(b, &gb)?,
            })
        })
        .collect()
}

/// Liouville-distributed boundary vector.
pub fn random_boundary_vector(surface: &SurfaceModel, rng: &mut ChaCha8Rng) -> BoundaryVector {
    let lengths = surface.boundary().lengths();
    let total = lengths.iter().sum();
    draw(rng, &lengths, total)
}

/// Draws `pairs` random `(γ, τ)` from the Liouville measure and counts both
/// surfaces. Pair `k` uses stream `k` of `seed`; flagged pairs are redrawn.
pub fn difference_sweep(a: &SurfaceModel, b: &SurfaceModel, pairs: usize, seed: u64, opts: &TraceOptions) -> Result<DifferenceReport> {
    same_boundary(a, b)?;
    let opts = &TraceOptions {
        polyline: true,
        ..*opts
    };
    let done: Vec<(DifferenceSample, usize)> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            for redraw in 0..1000 {
                let g = random_boundary_vector(a, &mut rng);
                let t = random_boundary_vector(a, &mut rng);
                let sample = |s: &SurfaceModel| -> Result<Option<usize>> {
                    match (traced(s, &g, opts)?, traced(s, &t, opts)?) {
                        (Some(pg), Some(pt)) => clean_count(s, &pg, &pt),
                        _ => Ok(None),
                    }
                };
                let (i_a, i_b) = (sample(a)?, sample(b)?);
                if i_a.is_some() && i_b.is_some() {
                    return Ok((
                        DifferenceSample {
                            gamma: g,
                            tau: t,
                            i_a,
                            i_b,
                        },
                        redraw,
                    ));
                }
            }
            Err(Error::Numeric(format!("pair {k}: no clean draw")))
        })
        .collect::<Result<_>>()?;
    Ok(DifferenceReport {
        redrawn: done.iter().map(|d| d.1).sum(),
        samples: done.into_iter().map(|d| d.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_and_cap_differ_by_one() {
        let m = SurfaceModel::mobius(1.0).unwrap();
        let c = SurfaceModel::capped(1.0).unwrap();
        let r = difference_sweep(&m, &c, 50, 3, &TraceOptions::default()).unwrap();
        assert_eq!(r.exceptions(-1), vec![]);
    }

    #[test]
    fn mismatched_boundaries_are_incomparable() {
        let m = SurfaceModel::mobius(1.0).unwrap();
        let f = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!(matches!(difference_sweep(&m, &f, 1, 0, &TraceOptions::default()), Err(Error::Incomparable(_))));
    }

    #[test]
    fn explicit_pairs() {
        let m = SurfaceModel::mobius(1.0).unwrap();
        let c = SurfaceModel::capped(1.0).unwrap();
        let g = BoundaryVector::new(0, 0.3, 0.2);
        let taus = [BoundaryVector::new(0, 2.0, -0.4), BoundaryVector::new(0, 4.0, 0.9)];
        for s in intersection_difference(&m, &c, &g, &taus, &TraceOptions::default()).unwrap() {
            assert_eq!(s.diff(), Some(-1), "{s:?}");
        }
    }
}
