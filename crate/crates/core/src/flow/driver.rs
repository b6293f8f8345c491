//! Adaptive integration of the geodesic equations of `dt² + F² dx²`,
//! with boundary localization and glue continuation.
//!
//! State layout: `[t, x, v_t, v_x, payload...]`. `x` stays unwrapped within
//! a band piece; the glue rules add the antipodal shift without wrapping.

use super::{GeodesicState, JunctionKind, TraceOptions};
use crate::error::Result;
use crate::ode::{locate_crossing, Stepper};
use crate::surface::SurfaceModel;

pub(crate) enum Observation<const N: usize> {
    Sample {
        arclen: f64,
        y: [f64; N],
        piece: usize,
    },
    Junction {
        kind: JunctionKind,
        arclen_in: f64,
        y_in: [f64; N],
    },
}

pub(crate) enum Stop<const N: usize> {
    Exited { y: [f64; N], arclen: f64 },
    Cutoff { y: [f64; N], arclen: f64 },
    Reached { y: [f64; N], arclen: f64 },
}

pub(crate) struct DriveRequest<'a> {
    pub surface: &'a SurfaceModel,
    pub opts: &'a TraceOptions,
    /// Stop exactly at this arclength instead of at the boundary.
    pub target: Option<f64>,
    /// Emit samples only at multiples of this arclength (plus events).
    pub sample_step: Option<f64>,
}

pub(crate) fn geodesic_rhs<const N: usize>(surface: &SurfaceModel, y: &[f64; N]) -> [f64; N] {
    let w = surface.warp(y[0]);
    let mut d = [0.0; N];
    d[0] = y[2];
    d[1] = y[3];
    d[2] = w.f * w.df * y[3] * y[3];
    d[3] = -2.0 * w.df / w.f * y[2] * y[3];
    d
}

pub(crate) fn state_of<const N: usize>(y: &[f64; N], arclen: f64) -> GeodesicState {
    GeodesicState {
        t: y[0],
        x: y[1],
        v_t: y[2],
        v_x: y[3],
        arclen,
    }
}

/// Integrates from `y0` until the geodesic leaves through a free boundary,
/// reaches the cutoff or reaches `req.target`.
///
/// `extra` fills the payload derivatives; `on_cap` advances the payload
/// across a hemisphere traversal of radius `R` (given as argument).
pub(crate) fn drive<const N: usize, R, C, O>(
    req: &DriveRequest<'_>,
    y0: [f64; N],
    arclen0: f64,
    extra: R,
    on_cap: C,
    mut observe: O,
) -> Result<(Stop<N>, usize)>
where
    R: Fn(&[f64; N], &mut [f64; N]),
    C: Fn(&mut [f64; N], f64),
    O: FnMut(Observation<N>),
{
    let surface = req.surface;
    let opts = req.opts;
    let (t_min, t_max) = (surface.t_min(), surface.t_max());
    let f = |y: &[f64; N]| {
        let mut d = geodesic_rhs(surface, y);
        extra(y, &mut d);
        d
    };
    let inside = |y: &[f64; N]| (y[0] - t_min).min(t_max - y[0]);
    let mut stepper = Stepper::new(opts.tol, opts.h_init, opts.h_max);
    let cutoff = arclen0 + opts.cutoff(surface);
    let mut y = y0;
    let mut s = arclen0;
    let mut piece = 0;
    let mut crossings = 0;
    let mut next_sample = req.sample_step.map(|h| arclen0 + h);
    observe(Observation::Sample { arclen: s, y, piece });

    loop {
        if let Some(tg) = req.target {
            if s >= tg {
                return Ok((Stop::Reached { y, arclen: s }, crossings));
            }
        }
        if s >= cutoff {
            return Ok((Stop::Cutoff { y, arclen: s }, crossings));
        }
        let mut limit = cutoff - s;
        if let Some(tg) = req.target {
            limit = limit.min(tg - s);
        }
        let sample_limit = next_sample.map(|ns| ns - s);
        if let Some(sl) = sample_limit {
            limit = limit.min(sl);
        }
        let (h, y1) = stepper.advance(&f, &y, limit)?;

        if inside(&y1) < 0.0 {
            let (hc, mut yc) = locate_crossing(&f, &y, h, opts.tol, inside, opts.locate_tol);
            let level = if (yc[0] - t_min).abs() < (yc[0] - t_max).abs() {
                t_min
            } else {
                t_max
            };
            yc[0] = level;
            s += hc;
            observe(Observation::Sample { arclen: s, y: yc, piece });
            let glued = surface.fold_at() == Some(level) || surface.cap_at() == Some(level);
            if !glued {
                return Ok((Stop::Exited { y: yc, arclen: s }, crossings));
            }
            let out = surface.glue_map(&state_of(&yc, s))?;
            let kind = if surface.cap_at() == Some(level) {
                JunctionKind::Cap
            } else {
                JunctionKind::Fold
            };
            let mut yo = yc;
            yo[1] = yc[1] + surface.antipodal_shift();
            yo[2] = out.state.v_t;
            yo[3] = out.state.v_x;
            if kind == JunctionKind::Cap {
                on_cap(&mut yo, surface.cap_radius());
            }
            let s_out = s + out.arclen_added;
            observe(Observation::Junction {
                kind,
                arclen_in: s,
                y_in: yc,
            });
            piece += 1;
            crossings += 1;
            s = s_out;
            y = yo;
            observe(Observation::Sample { arclen: s, y, piece });
            if let Some(step) = req.sample_step {
                next_sample = Some(s + step);
            }
            continue;
        }

        s += h;
        y = y1;
        match (req.sample_step, sample_limit) {
            (Some(step), Some(sl)) => {
                if h == sl {
                    observe(Observation::Sample { arclen: s, y, piece });
                    next_sample = Some(next_sample.unwrap() + step);
                }
            }
            _ => observe(Observation::Sample { arclen: s, y, piece }),
        }
    }
}
