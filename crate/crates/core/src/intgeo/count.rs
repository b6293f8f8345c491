//! Transversal intersection counts between traced geodesics.

use crate::error::Result;
use crate::flow::{GeodesicPolyline, JunctionKind, PolySample};
use crate::surface::{SurfaceKind, SurfaceModel};

/// Crossings at angles below this (radians, as a sine) are flagged.
pub const MIN_CROSSING_SINE: f64 = 1e-6;
/// Crossings this close to a geodesic endpoint are flagged.
pub const ENDPOINT_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionReport {
    pub count: usize,
    pub flagged_tangential: usize,
    /// Smallest chart distance between a counted crossing and a geodesic
    /// endpoint (infinite when nothing was counted).
    pub min_separation: f64,
}

impl IntersectionReport {
    fn empty() -> Self {
        Self {
            count: 0,
            flagged_tangential: 0,
            min_separation: f64::INFINITY,
        }
    }

    fn absorb(&mut self, other: IntersectionReport) {
        self.count += other.count;
        self.flagged_tangential += other.flagged_tangential;
        self.min_separation = self.min_separation.min(other.min_separation);
    }

    pub fn is_clean(&self) -> bool {
        self.flagged_tangential == 0
    }
}

type Pt = [f64; 2];

fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: Pt, b: Pt) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A chart path: consecutive points joined by segments.
struct Path {
    pts: Vec<Pt>,
    x_lo: f64,
    x_hi: f64,
}

impl Path {
    fn new(pts: Vec<Pt>) -> Self {
        let x_lo = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let x_hi = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        Self { pts, x_lo, x_hi }
    }
}

fn piece_points(piece: &[PolySample], map: impl Fn(&PolySample) -> Pt) -> Vec<Pt> {
    piece.iter().map(map).collect()
}

/// Counts crossings between two chart paths on a cylinder of period `c`
/// in `x`. `ends` are the true geodesic endpoints for the guard.
fn count_paths(a: &Path, b: &Path, period: f64, ends: &[Pt]) -> IntersectionReport {
    let mut rep = IntersectionReport::empty();
    let k_lo = ((a.x_lo - b.x_hi) / period).floor() as i64 - 1;
    let k_hi = ((a.x_hi - b.x_lo) / period).ceil() as i64 + 1;
    let na = a.pts.len() - 1;
    let nb = b.pts.len() - 1;
    for k in k_lo..=k_hi {
        let shift = k as f64 * period;
        if b.x_hi + shift < a.x_lo - 1e-12 || b.x_lo + shift > a.x_hi + 1e-12 {
            continue;
        }
        for i in 0..na {
            let (p0, p1) = (a.pts[i], a.pts[i + 1]);
            let d1 = [p1[0] - p0[0], p1[1] - p0[1]];
            let (ax0, ax1) = (p0[1].min(p1[1]), p0[1].max(p1[1]));
            let (at0, at1) = (p0[0].min(p1[0]), p0[0].max(p1[0]));
            for j in 0..nb {
                let q0 = [b.pts[j][0], b.pts[j][1] + shift];
                let q1 = [b.pts[j + 1][0], b.pts[j + 1][1] + shift];
                if q0[1].max(q1[1]) < ax0 - 1e-12
                    || q0[1].min(q1[1]) > ax1 + 1e-12
                    || q0[0].max(q1[0]) < at0 - 1e-12
                    || q0[0].min(q1[0]) > at1 + 1e-12
                {
                    continue;
                }
                let d2 = [q1[0] - q0[0], q1[1] - q0[1]];
                let den = cross(d1, d2);
                let l1 = d1[0].hypot(d1[1]);
                let l2 = d2[0].hypot(d2[1]);
                let w = [q0[0] - p0[0], q0[1] - p0[1]];
                if den.abs() <= MIN_CROSSING_SINE * l1 * l2 {
                    // parallel: flag only when the segments overlap
                    if cross(w, d1).abs() <= 1e-12 * l1.max(1e-300) {
                        let proj = |p: Pt| ((p[0] - p0[0]) * d1[0] + (p[1] - p0[1]) * d1[1]) / (l1 * l1);
                        let (s0, s1) = (proj(q0), proj(q1));
                        if s0.max(s1) >= 0.0 && s0.min(s1) <= 1.0 {
                            rep.flagged_tangential += 1;
                        }
                    }
                    continue;
                }
                let u = cross(w, d2) / den;
                let v = cross(w, d1) / den;
                // half-open at interior vertices so shared vertices count once
                let u_ok = u >= 0.0 && (u < 1.0 || (i == na - 1 && u <= 1.0));
                let v_ok = v >= 0.0 && (v < 1.0 || (j == nb - 1 && v <= 1.0));
                if !(u_ok && v_ok) {
                    continue;
                }
                let x = [p0[0] + u * d1[0], p0[1] + u * d1[1]];
                let sep = ends
                    .iter()
                    .flat_map(|e| (-1..=1).map(move |m| dist(x, [e[0], e[1] + m as f64 * period])))
                    .fold(f64::INFINITY, f64::min);
                if sep <= ENDPOINT_GUARD {
                    rep.flagged_tangential += 1;
                } else {
                    rep.count += 1;
                    rep.min_separation = rep.min_separation.min(sep);
                }
            }
        }
    }
    rep
}

fn endpoints(p: &GeodesicPolyline, lift: impl Fn(usize, &PolySample) -> Pt) -> Vec<Pt> {
    let mut out = Vec::new();
    if let Some(s) = p.pieces.first().and_then(|q| q.first()) {
        out.push(lift(0, s));
    }
    if let Some(s) = p.pieces.last().and_then(|q| q.last()) {
        out.push(lift(p.pieces.len() - 1, s));
    }
    out
}

fn check_contract(p: &GeodesicPolyline) -> Result<()> {
    p.validate()
}

/// Crossings of every band piece of `p1` with every band piece of `p2`, in
/// the band chart.
pub fn count_band(surface: &SurfaceModel, p1: &GeodesicPolyline, p2: &GeodesicPolyline) -> Result<IntersectionReport> {
    check_contract(p1)?;
    check_contract(p2)?;
    let plain = |_: usize, s: &PolySample| [s.t, s.x];
    let mut ends = endpoints(p1, plain);
    ends.extend(endpoints(p2, plain));
    let mut rep = IntersectionReport::empty();
    for a in &p1.pieces {
        let pa = Path::new(piece_points(a, |s| [s.t, s.x]));
        for b in &p2.pieces {
            let pb = Path::new(piece_points(b, |s| [s.t, s.x]));
            rep.absorb(count_paths(&pa, &pb, surface.circumference(), &ends));
        }
    }
    Ok(rep)
}

/// Lift to the orientation double cover `[−l, l] × S¹`: pieces after an
/// odd number of fold crossings are mapped by `σ(t, x) = (−t, x − C/2)`.
fn lift(surface: &SurfaceModel, p: &GeodesicPolyline) -> Vec<Pt> {
    let h = surface.antipodal_shift();
    let c = surface.circumference();
    let mut out: Vec<Pt> = Vec::new();
    for (k, piece) in p.pieces.iter().enumerate() {
        let map = |s: &PolySample| if k % 2 == 1 { [-s.t, s.x - h] } else { [s.t, s.x] };
        // pieces are unwrapped separately; join them continuously
        let shift = match (out.last(), piece.first()) {
            (Some(l), Some(f)) => c * ((l[1] - map(f)[1]) / c).round(),
            _ => 0.0,
        };
        for s in piece {
            let q = map(s);
            let q = [q[0], q[1] + shift];
            if out.last().map_or(true, |l| dist(*l, q) > 1e-13) {
                out.push(q);
            }
        }
    }
    out
}

fn count_double_cover(surface: &SurfaceModel, p1: &GeodesicPolyline, p2: &GeodesicPolyline) -> Result<IntersectionReport> {
    check_contract(p1)?;
    check_contract(p2)?;
    let h = surface.antipodal_shift();
    let l1 = lift(surface, p1);
    let l2 = lift(surface, p2);
    let s2: Vec<Pt> = l2.iter().map(|q| [-q[0], q[1] + h]).collect();
    let ends: Vec<Pt> = [l1.first(), l1.last(), l2.first(), l2.last(), s2.first(), s2.last()]
        .into_iter()
        .flatten()
        .copied()
        .collect();
    let a = Path::new(l1);
    let mut rep = count_paths(&a, &Path::new(l2), surface.circumference(), &ends);
    rep.absorb(count_paths(&a, &Path::new(s2), surface.circumference(), &ends));
    Ok(rep)
}

/// Endpoint pairs `(a0, a1)` and `(b0, b1)` on a circle interleave.
fn interleave(a0: f64, a1: f64, b0: f64, b1: f64, period: f64) -> Option<bool> {
    let rel = |x: f64| (x - a0).rem_euclid(period);
    let span = rel(a1);
    let (r0, r1) = (rel(b0), rel(b1));
    let near = |r: f64| r.min(period - r) < ENDPOINT_GUARD || (r - span).abs() < ENDPOINT_GUARD;
    if near(r0) || near(r1) {
        return None;
    }
    Some((r0 < span) != (r1 < span))
}

fn cap_arcs(p: &GeodesicPolyline) -> Vec<(f64, f64)> {
    p.junctions
        .iter()
        .enumerate()
        .filter(|(_, j)| **j == JunctionKind::Cap)
        .filter_map(|(k, _)| {
            let a = p.pieces[k].last()?;
            let b = p.pieces.get(k + 1)?.first()?;
            Some((a.x, b.x))
        })
        .collect()
}

/// Transversal intersection count of two traced geodesics on `surface`.
///
/// Möbius traces are counted in the double cover as
/// `#(L₁ ∩ L₂) + #(L₁ ∩ σL₂)`. Capped traces add one crossing per pair of
/// cap arcs whose equator endpoints interleave.
pub fn count_intersections(surface: &SurfaceModel, p1: &GeodesicPolyline, p2: &GeodesicPolyline) -> Result<IntersectionReport> {
    match surface.kind() {
        SurfaceKind::MobiusQuotient => count_double_cover(surface, p1, p2),
        SurfaceKind::CappedCylinder => {
            let mut rep = count_band(surface, p1, p2)?;
            for (a0, a1) in cap_arcs(p1) {
                for (b0, b1) in cap_arcs(p2) {
                    match interleave(a0, a1, b0, b1, surface.circumference()) {
                        Some(true) => rep.count += 1,
                        Some(false) => {}
                        None => rep.flagged_tangential += 1,
                    }
                }
            }
            Ok(rep)
        }
        SurfaceKind::FlatCylinder | SurfaceKind::WarpedProduct => count_band(surface, p1, p2),
    }
}

/// Crossings of a traced geodesic with the parallel circle `t = level`.
pub fn count_circle(p: &GeodesicPolyline, level: f64) -> Result<IntersectionReport> {
    check_contract(p)?;
    let mut rep = IntersectionReport::empty();
    let first = p.first().map(|s| s.t);
    let last = p.last().map(|s| s.t);
    let touches_end = |t: f64| (t - level).abs() <= ENDPOINT_GUARD;
    if first.map_or(false, touches_end) || last.map_or(false, touches_end) {
        rep.flagged_tangential += 1;
        return Ok(rep);
    }
    for piece in &p.pieces {
        for w in piece.windows(2) {
            let (g0, g1) = (w[0].t - level, w[1].t - level);
            if (g0 < 0.0) != (g1 < 0.0) {
                rep.count += 1;
            }
        }
    }
    Ok(rep)
}

/// Crossings with the meridian segment `x = x0 (mod C)`, `t ∈ [t0, t1]`.
pub fn count_meridian(p: &GeodesicPolyline, x0: f64, t0: f64, t1: f64, period: f64) -> Result<IntersectionReport> {
    check_contract(p)?;
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    let mut rep = IntersectionReport::empty();
    for piece in &p.pieces {
        for w in piece.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            // clip the segment to the meridian's t-range
            let dt = b.t - a.t;
            let (mut u0, mut u1) = (0.0, 1.0);
            if dt.abs() > 0.0 {
                let ua = (lo - a.t) / dt;
                let ub = (hi - a.t) / dt;
                u0 = ua.min(ub).max(0.0);
                u1 = ua.max(ub).min(1.0);
            } else if a.t < lo || a.t > hi {
                continue;
            }
            if u0 > u1 {
                continue;
            }
            let xa = a.x + u0 * (b.x - a.x);
            let xb = a.x + u1 * (b.x - a.x);
            let (xl, xr) = (xa.min(xb), xa.max(xb));
            if xr - xl <= 0.0 {
                continue;
            }
            let k_lo = ((xl - x0) / period).ceil() as i64;
            let k_hi = ((xr - x0) / period).floor() as i64;
            for k in k_lo..=k_hi {
                let xc = x0 + k as f64 * period;
                let uc = u0 + (u1 - u0) * (xc - xa) / (xb - xa);
                let tc = a.t + uc * dt;
                let near_tip = (tc - lo).abs() <= ENDPOINT_GUARD || (tc - hi).abs() <= ENDPOINT_GUARD;
                let near_vertex = (xc - xl).abs() <= ENDPOINT_GUARD && u0 == 0.0
                    || (xr - xc).abs() <= ENDPOINT_GUARD && u1 == 1.0;
                if near_tip || near_vertex {
                    rep.flagged_tangential += 1;
                } else {
                    rep.count += 1;
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::flow::{trace_from_boundary, TraceOptions};
    use crate::lens::BoundaryVector;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn line(pts: &[(f64, f64)]) -> GeodesicPolyline {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for (k, &(t, x)) in pts.iter().enumerate() {
            if k > 0 {
                let (pt, px) = pts[k - 1];
                acc += (t - pt).hypot(x - px);
            }
            out.push(PolySample {
                t,
                x,
                arclen: acc,
                v_t: 0.0,
                v_x: 0.0,
            });
        }
        GeodesicPolyline {
            pieces: vec![out],
            junctions: vec![],
        }
    }

    #[test]
    fn parallel_meridians_do_not_meet() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let r = count_intersections(&flat, &line(&[(0.0, 0.0), (1.0, 0.0)]), &line(&[(0.0, 1.0), (1.0, 1.0)])).unwrap();
        assert_eq!((r.count, r.flagged_tangential), (0, 0));
    }

    #[test]
    fn meridian_against_diagonal() {
        // from s = −0.5 at θ = π/4, advancing 1 rad across the meridian x = 0
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let opts = TraceOptions::default();
        let g = trace_from_boundary(&flat, &BoundaryVector::new(0, -0.5, FRAC_PI_4), &opts).unwrap();
        let m = trace_from_boundary(&flat, &BoundaryVector::new(0, 0.0, 0.0), &opts).unwrap();
        let r = count_intersections(&flat, &m.polyline, &g.polyline).unwrap();
        assert_eq!(r.count, 1);
        // independent line-crossing computation: x(t) = −0.5 + t − 2π·k hits 0 once
        let crossings = (0..=0).filter(|k| {
            let t = 0.5 + 2.0 * PI * *k as f64;
            (0.0..=1.0).contains(&t)
        });
        assert_eq!(crossings.count(), 1);
    }

    #[test]
    fn symmetric_and_orientation_free() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let opts = TraceOptions::default();
        let g = trace_from_boundary(&flat, &BoundaryVector::new(0, 1.0, 1.4), &opts).unwrap().polyline;
        let h = trace_from_boundary(&flat, &BoundaryVector::new(1, 5.0, -1.3), &opts).unwrap().polyline;
        let n = count_intersections(&flat, &g, &h).unwrap().count;
        assert!(n >= 1);
        assert_eq!(count_intersections(&flat, &h, &g).unwrap().count, n);
        assert_eq!(count_intersections(&flat, &g.reversed(), &h).unwrap().count, n);
    }

    #[test]
    fn interleaving_rule() {
        let c = 2.0 * PI;
        assert_eq!(interleave(0.0, PI, 1.0, 1.0 + PI, c), Some(true));
        assert_eq!(interleave(0.0, 1.0, 2.0, 3.0, c), Some(false));
        assert_eq!(interleave(0.0, PI, 0.0, PI, c), None);
    }

    #[test]
    fn tangential_overlap_is_flagged() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let r = count_intersections(&flat, &line(&[(0.0, 0.0), (1.0, 0.0)]), &line(&[(0.2, 0.0), (0.8, 0.0)])).unwrap();
        assert_eq!((r.count, r.flagged_tangential), (0, 1));
    }

    #[test]
    fn contract_violations_error() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let bad = GeodesicPolyline::default();
        assert!(matches!(
            count_intersections(&flat, &bad, &line(&[(0.0, 0.0), (1.0, 0.0)])),
            Err(Error::Polyline(_))
        ));
    }

    #[test]
    fn circle_and_meridian_counters() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let opts = TraceOptions::default();
        let g = trace_from_boundary(&flat, &BoundaryVector::new(0, 0.1, 1.2), &opts).unwrap().polyline;
        assert_eq!(count_circle(&g, 0.5).unwrap().count, 1);
        // x runs over [0.1, 0.1 + tan 1.2], crossing x ≡ 0 once per period
        let span = 1.2f64.tan();
        let expect = ((0.1 + span) / (2.0 * PI)).floor() as usize;
        assert_eq!(count_meridian(&g, 0.0, 0.0, 1.0, 2.0 * PI).unwrap().count, expect);
    }
}
