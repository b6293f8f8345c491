//! Boundary-to-boundary traces on warped products by quadrature of the
//! Clairaut first integral `c = F²·ẋ`, with turning points `F(t*) = |c|`.

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::surface::WarpedProfile;

const SCAN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Turning {
    None,
    /// `F = a` crossed transversally; the geodesic reflects in `t`.
    Transversal(f64),
    /// `F − a` touches zero at a critical point of `F`; approached only
    /// asymptotically.
    Asymptotic(f64),
}

fn bisect(mut lo: f64, mut hi: f64, mut keep_lo: impl FnMut(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if keep_lo(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First point travelling from `from` to `to` where `F(t) ≤ a`.
pub(crate) fn find_turning(p: &WarpedProfile, from: f64, to: f64, a: f64) -> Turning {
    if a < p.lower_bound() - 1e-12 {
        return Turning::None;
    }
    let tol = 1e-12 * a.max(1.0);
    let dir = (to - from).signum();
    let g = |t: f64| p.eval(t).f - a;
    let slope = |t: f64| dir * p.eval(t).df;
    let at = |k: usize| from + (to - from) * k as f64 / SCAN as f64;
    // a nondegenerate minimum of F holds the geodesic within tol; a flat
    // stretch only when F − a vanishes there, otherwise it crosses slowly
    let holds = |m: f64, gm: f64| p.eval(m).ddf > 1e-6 || gm <= 0.0;
    let step = (to - from) / SCAN as f64;
    // minimum of g at or after `t0`, where the slope first turns upward
    let min_after = |t0: f64| {
        let mut l = t0;
        loop {
            let r = if (to - (l + step)) * dir <= 0.0 { to } else { l + step };
            if slope(r) >= 0.0 {
                let m = bisect(l, r, |t| slope(t) < 0.0);
                return (m, g(m));
            }
            if r == to {
                return (to, g(to));
            }
            l = r;
        }
    };
    let mut left = from;
    for k in 1..=SCAN {
        let right = at(k);
        if g(right) <= 0.0 {
            // a root lies in (left, right]; asymptotic when g never
            // drops measurably below zero past it
            let r = bisect(left, right, |t| g(t) > 0.0);
            let (m, gm) = min_after(r);
            if gm >= -tol && p.eval(m).df.abs() <= 1e-6 && holds(m, gm) {
                return Turning::Asymptotic(m);
            }
            return Turning::Transversal(r);
        }
        if slope(left) < 0.0 && slope(right) >= 0.0 {
            let m = bisect(left, right, |t| slope(t) < 0.0);
            let gm = g(m);
            if gm.abs() <= tol && holds(m, gm) {
                return Turning::Asymptotic(m);
            }
            if gm < 0.0 {
                return Turning::Transversal(bisect(left, m, |t| g(t) > 0.0));
            }
        }
        left = right;
    }
    Turning::None
}

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

fn checked(r: quad::QuadResult, what: &str) -> Result<f64> {
    if !r.converged && r.error > 1e-9 * r.value.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "{what} quadrature did not converge (error {:e})",
            r.error
        )));
    }
    Ok(r.value)
}

/// `(length, Δx)` for a monotone leg from `t0` to `t1` with constant `c`.
pub(crate) fn crossing_leg(p: &WarpedProfile, t0: f64, t1: f64, c: f64) -> Result<(f64, f64)> {
    let a = c.abs();
    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
    // stretches with F ≡ 1 in closed form
    let (q_lo, q_hi, flat) = match p {
        WarpedProfile::Bump(b) => {
            let (s_lo, s_hi) = b.support();
            let (q_lo, q_hi) = (s_lo.clamp(lo, hi), s_hi.clamp(lo, hi));
            (q_lo, q_hi, (hi - lo) - (q_hi - q_lo))
        }
        WarpedProfile::Cosh => (lo, hi, 0.0),
    };
    let flat_root = ((1.0 - a) * (1.0 + a)).sqrt();
    let (mut len, mut dx) = (flat / flat_root, c * flat / flat_root);
    if q_hi > q_lo {
        let mut breaks = p.breakpoints();
        // F − a as gap(t, t_m) + (F(t_m) − a) about the lowest point t_m, so
        // near-critical legs keep their digits
        let t_m = breaks
            .iter()
            .copied()
            .filter(|b| *b > q_lo && *b < q_hi)
            .chain([q_lo, q_hi])
            .min_by(|x, y| p.eval(*x).f.total_cmp(&p.eval(*y).f))
            .unwrap_or(q_lo);
        let base = p.eval(t_m).f - a;
        if let WarpedProfile::Bump(b) = p {
            // thin edge layers where h climbs past base
            for k in -2..=12 {
                if let Some(r) = b.level_radius(base * 10f64.powi(k)) {
                    breaks.extend([-b.shift - r, -b.shift + r]);
                }
            }
            breaks.sort_by(f64::total_cmp);
        }
        let root = |t: f64| {
            let f = p.eval(t).f;
            (f, ((p.gap(t, t_m) + base) * (f + a)).sqrt())
        };
        let l = quad::integrate(
            |t| {
                let (f, r) = root(t);
                f / r
            },
            q_lo,
            q_hi,
            &breaks,
            opts(),
        );
        let d = quad::integrate(
            |t| {
                let (f, r) = root(t);
                c / (f * r)
            },
            q_lo,
            q_hi,
            &breaks,
            opts(),
        );
        len += checked(l, "length")?;
        dx += checked(d, "fiber")?;
    }
    Ok((len, dx))
}

/// `(length, Δx)` from `t_b` to the turning level `t_star` and back.
///
/// Substituting `t = t* + D·u²` removes the inverse square-root singularity
/// at the turning point.
pub(crate) fn turning_leg(p: &WarpedProfile, t_b: f64, t_star: f64, c: f64) -> Result<(f64, f64)> {
    let a = c.abs();
    let d = t_b - t_star;
    let slope = p.eval(t_star).df.abs();
    let fa = p.eval(t_star).f;
    let parts = |u: f64| {
        let t = t_star + d * u * u;
        let f = p.eval(t).f;
        let mut gap = p.gap(t, t_star);
        if !(gap > 0.0) {
            gap = slope * d.abs() * u * u;
        }
        let jac = 2.0 * d.abs() * u;
        (f, jac / (gap * (f + fa.max(a))).sqrt())
    };
    // breakpoints of F pulled back to u
    let ubreaks: Vec<f64> = p
        .breakpoints()
        .into_iter()
        .filter_map(|b| {
            let r = (b - t_star) / d;
            (r > 0.0 && r < 1.0).then(|| r.sqrt())
        })
        .collect();
    let len = quad::integrate(
        |u| {
            let (f, w) = parts(u);
            f * w
        },
        0.0,
        1.0,
        &ubreaks,
        opts(),
    );
    let dx = quad::integrate(
        |u| {
            let (f, w) = parts(u);
            c * w / f
        },
        0.0,
        1.0,
        &ubreaks,
        opts(),
    );
    Ok((2.0 * checked(len, "length")?, 2.0 * checked(dx, "fiber")?))
}
