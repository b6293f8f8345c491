//! Dormand–Prince 5(4) stepping for autonomous systems, plus bisection
//! localization of a sign change inside an accepted step.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h`. Returns the fifth-order solution
/// and the scaled RMS error norm (accept when `<= 1`).
pub fn dopri_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64, tol: Tolerances) -> ([f64; N], f64)
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(C2, &k1)]));
    let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y5);
    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
        acc += (e / scale).powi(2);
    }
    (y5, (acc / N as f64).sqrt())
}

/// Adaptive step-size controller around [`dopri_step`].
#[derive(Debug, Clone)]
pub struct Stepper {
    pub tol: Tolerances,
    pub h_max: f64,
    h: f64,
}

impl Stepper {
    pub fn new(tol: Tolerances, h_init: f64, h_max: f64) -> Self {
        Self {
            tol,
            h_max,
            h: h_init.min(h_max),
        }
    }

    /// Takes one accepted step of length at most `limit`.
    pub fn advance<const N: usize, F>(&mut self, f: &F, y: &[f64; N], limit: f64) -> Result<(f64, [f64; N])>
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let ideal = self.h.min(self.h_max);
        let mut h = ideal.min(limit);
        let mut clipped = limit < ideal;
        loop {
            let (y5, err) = dopri_step(f, y, h, self.tol);
            if err.is_finite() && err <= 1.0 {
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let next = (h * grow).min(self.h_max);
                // a step clipped by `limit` says nothing about the ideal size
                self.h = if clipped { ideal.max(next) } else { next };
                return Ok((h, y5));
            }
            clipped = false;
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= shrink;
            if h < 1e-15 {
                return Err(Error::Numeric(format!(
                    "step size underflow (error norm {err:e})"
                )));
            }
        }
    }
}

/// Given `g(y) >= 0` at the step start and `g(y(h_hi)) < 0`, narrows the
/// crossing step length to within `tol` by bisection, then refines with one
/// secant step. Returns the step length and the state there.
pub fn locate_crossing<const N: usize, F, G>(
    f: &F,
    y: &[f64; N],
    h_hi: f64,
    tol: Tolerances,
    g: G,
    arclen_tol: f64,
) -> (f64, [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    let mut lo = 0.0;
    let mut g_lo = g(y);
    let mut hi = h_hi;
    let mut g_hi = g(&dopri_step(f, y, hi, tol).0);
    for _ in 0..200 {
        if hi - lo <= arclen_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(&dopri_step(f, y, mid, tol).0);
        if g_mid >= 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let h = if g_lo - g_hi > 0.0 {
        lo + (hi - lo) * g_lo / (g_lo - g_hi)
    } else {
        lo
    };
    let h = h.clamp(lo, hi);
    (h, dopri_step(f, y, h, tol).0)
}
