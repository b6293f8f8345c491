//! Geodesic tracing from boundary vectors: exact straight lines for flat
//! bands, Clairaut quadrature for warped products, adaptive Runge–Kutta
//! for everything (and as an oracle for the other two).

pub(crate) mod clairaut;
pub(crate) mod driver;
pub mod polyline;

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::lens::BoundaryVector;
use crate::ode::Tolerances;
use crate::surface::{SurfaceKind, SurfaceModel};

use clairaut::Turning;
use driver::{DriveRequest, Observation, Stop};
pub use polyline::{resample_polyline, GeodesicPolyline, JunctionKind, PolySample};

/// Chart position, chart velocity and accumulated arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub x: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub arclen: f64,
}

impl GeodesicState {
    pub fn new(t: f64, x: f64, v_t: f64, v_x: f64) -> Self {
        Self {
            t,
            x,
            v_t,
            v_x,
            arclen: 0.0,
        }
    }

    /// Unit vector at `(t, x)` making angle `alpha` with `+∂t`, positive
    /// towards `+∂x`.
    pub fn from_angle(surface: &SurfaceModel, t: f64, x: f64, alpha: f64) -> Self {
        let f = surface.warp(t).f;
        Self::new(t, x, alpha.cos(), alpha.sin() / f)
    }

    /// `g(v, v)`; equals 1 along a unit-speed geodesic.
    pub fn speed_sq(&self, surface: &SurfaceModel) -> f64 {
        let f = surface.warp(self.t).f;
        self.v_t * self.v_t + f * f * self.v_x * self.v_x
    }

    /// Clairaut integral `F(t)²·v_x`.
    pub fn clairaut(&self, surface: &SurfaceModel) -> f64 {
        let f = surface.warp(self.t).f;
        f * f * self.v_x
    }

    pub fn reversed(&self) -> Self {
        Self {
            v_t: -self.v_t,
            v_x: -self.v_x,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMethod {
    /// Exact on flat bands, Clairaut on warped products.
    Auto,
    Exact,
    Clairaut,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub method: TraceMethod,
    pub tol: Tolerances,
    pub h_init: f64,
    pub h_max: f64,
    /// Arclength tolerance for boundary localization.
    pub locate_tol: f64,
    /// Cutoff arclength as a multiple of the band width.
    pub cutoff_factor: f64,
    /// Record and resample a polyline.
    pub polyline: bool,
    pub max_turn: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            method: TraceMethod::Auto,
            tol: Tolerances::default(),
            h_init: 1e-2,
            h_max: 0.1,
            locate_tol: 1e-12,
            cutoff_factor: 1e3,
            polyline: true,
            max_turn: 0.05,
        }
    }
}

impl TraceOptions {
    pub fn with_method(mut self, method: TraceMethod) -> Self {
        self.method = method;
        self
    }

    pub fn without_polyline(mut self) -> Self {
        self.polyline = false;
        self
    }

    pub fn cutoff(&self, surface: &SurfaceModel) -> f64 {
        self.cutoff_factor * surface.width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    Exited,
    /// `presumed` marks a cutoff verdict rather than an analytic one.
    TrappedForward { presumed: bool },
    Tangent,
}

/// Exit point on a free boundary component, angle against the outward
/// normal with the shared tangent orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryExit {
    pub component: usize,
    pub s: f64,
    pub theta: f64,
    pub state: GeodesicState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub status: TraceStatus,
    pub exit: Option<BoundaryExit>,
    pub travel_time: Option<f64>,
    pub polyline: GeodesicPolyline,
    pub clairaut: Option<f64>,
    pub glue_crossings: usize,
    pub method: TraceMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapVerdict {
    Exits { component: usize },
    TrappedForward { presumed: bool },
    TotallyTrapped,
}

/// Chart state of an inward boundary vector.
pub fn initial_state(surface: &SurfaceModel, bv: &BoundaryVector) -> Result<GeodesicState> {
    if !(bv.theta.abs() <= FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "angle {} outside [-pi/2, pi/2]",
            bv.theta
        )));
    }
    let c = surface.component(bv.component)?;
    let f = surface.warp(c.t).f;
    let s = bv.s.rem_euclid(c.length);
    Ok(GeodesicState::new(
        c.t,
        s / f,
        c.inward * bv.theta.cos(),
        bv.theta.sin() / f,
    ))
}

/// Converts a state sitting on a free boundary circle to exit data.
pub fn exit_of(surface: &SurfaceModel, state: &GeodesicState) -> Result<BoundaryExit> {
    let c = surface.component_at(state.t).ok_or_else(|| {
        Error::Numeric(format!("exit state t={} is not on a free boundary", state.t))
    })?;
    let f = surface.warp(c.t).f;
    let mut s = f * surface.wrap_x(state.x);
    if s >= c.length {
        s -= c.length;
    }
    Ok(BoundaryExit {
        component: c.id,
        s,
        theta: (f * state.v_x).atan2(-c.inward * state.v_t),
        state: *state,
    })
}

fn sample(y: &[f64], arclen: f64) -> PolySample {
    PolySample {
        t: y[0],
        x: y[1],
        arclen,
        v_t: y[2],
        v_x: y[3],
    }
}

enum Ending {
    Exit(GeodesicState),
    Trapped { presumed: bool },
}

struct Leg {
    ending: Ending,
    polyline: GeodesicPolyline,
    crossings: usize,
}

fn exact_leg(surface: &SurfaceModel, start: &GeodesicState) -> Result<Leg> {
    let mut st = *start;
    let mut poly = GeodesicPolyline::new();
    let mut piece = 0;
    poly.push(piece, sample(&[st.t, st.x, st.v_t, st.v_x], st.arclen));
    let mut crossings = 0;
    loop {
        if st.v_t == 0.0 {
            return Ok(Leg {
                ending: Ending::Trapped { presumed: false },
                polyline: poly,
                crossings,
            });
        }
        let level = if st.v_t > 0.0 { surface.t_max() } else { surface.t_min() };
        let d = (level - st.t) / st.v_t;
        st.t = level;
        st.x += st.v_x * d;
        st.arclen += d;
        poly.push(piece, sample(&[st.t, st.x, st.v_t, st.v_x], st.arclen));
        let glued = surface.fold_at() == Some(level) || surface.cap_at() == Some(level);
        if !glued {
            return Ok(Leg {
                ending: Ending::Exit(st),
                polyline: poly,
                crossings,
            });
        }
        if crossings > 2 {
            return Err(Error::Numeric("straight trace keeps reaching glued circles".into()));
        }
        let kind = if surface.cap_at() == Some(level) {
            JunctionKind::Cap
        } else {
            JunctionKind::Fold
        };
        let out = surface.glue_map(&st)?;
        st = GeodesicState {
            x: st.x + surface.antipodal_shift(),
            ..out.state
        };
        poly.junctions.push(kind);
        piece += 1;
        crossings += 1;
        poly.push(piece, sample(&[st.t, st.x, st.v_t, st.v_x], st.arclen));
    }
}

fn ode_leg(surface: &SurfaceModel, start: &GeodesicState, opts: &TraceOptions) -> Result<Leg> {
    let req = DriveRequest {
        surface,
        opts,
        target: None,
        sample_step: None,
    };
    let mut poly = GeodesicPolyline::new();
    let record = opts.polyline;
    let (stop, crossings) = driver::drive(
        &req,
        [start.t, start.x, start.v_t, start.v_x],
        start.arclen,
        |_, _| {},
        |_, _| {},
        |obs| match obs {
            Observation::Sample { arclen, y, piece } => {
                if record {
                    poly.push(piece, sample(&y, arclen));
                }
            }
            Observation::Junction { kind, .. } => {
                if record {
                    poly.junctions.push(kind);
                }
            }
        },
    )?;
    let ending = match stop {
        Stop::Exited { y, arclen } => Ending::Exit(driver::state_of(&y, arclen)),
        Stop::Cutoff { .. } => Ending::Trapped { presumed: true },
        Stop::Reached { .. } => unreachable!("no target set"),
    };
    Ok(Leg {
        ending,
        polyline: poly,
        crossings,
    })
}

fn endpoints_polyline(a: &GeodesicState, b: Option<&GeodesicState>) -> GeodesicPolyline {
    let mut poly = GeodesicPolyline::new();
    poly.push(0, sample(&[a.t, a.x, a.v_t, a.v_x], a.arclen));
    if let Some(b) = b {
        poly.push(0, sample(&[b.t, b.x, b.v_t, b.v_x], b.arclen));
    }
    poly
}

fn clairaut_leg(surface: &SurfaceModel, start: &GeodesicState, opts: &TraceOptions) -> Result<Leg> {
    let p = *surface
        .profile()
        .ok_or_else(|| Error::Unsupported("Clairaut route needs a warped profile".into()))?;
    let comp = surface.component_at(start.t).ok_or_else(|| {
        Error::Unsupported("Clairaut route starts on a free boundary circle".into())
    })?;
    let t_b = comp.t;
    let t_far = if comp.inward > 0.0 { surface.t_max() } else { surface.t_min() };
    let c = start.clairaut(surface);
    let exit = match clairaut::find_turning(&p, t_b, t_far, c.abs()) {
        Turning::Asymptotic(_) => None,
        Turning::None => {
            let (len, dx) = clairaut::crossing_leg(&p, t_b, t_far, c)?;
            let f = p.eval(t_far).f;
            let vx = c / (f * f);
            let vt = start.v_t.signum() * (1.0 - (c / f).powi(2)).max(0.0).sqrt();
            Some(GeodesicState {
                t: t_far,
                x: start.x + dx,
                v_t: vt,
                v_x: vx,
                arclen: start.arclen + len,
            })
        }
        Turning::Transversal(ts) => {
            let (len, dx) = clairaut::turning_leg(&p, t_b, ts, c)?;
            Some(GeodesicState {
                t: t_b,
                x: start.x + dx,
                v_t: -start.v_t,
                v_x: start.v_x,
                arclen: start.arclen + len,
            })
        }
    };
    let polyline = if opts.polyline && exit.is_some() {
        ode_leg(surface, start, opts)?.polyline
    } else {
        endpoints_polyline(start, exit.as_ref())
    };
    Ok(Leg {
        ending: match exit {
            Some(e) => Ending::Exit(e),
            None => Ending::Trapped { presumed: false },
        },
        polyline,
        crossings: 0,
    })
}

fn resolve_method(surface: &SurfaceModel, m: TraceMethod) -> Result<TraceMethod> {
    Ok(match (m, surface.is_flat_band(), surface.kind()) {
        (TraceMethod::Auto, true, _) => TraceMethod::Exact,
        (TraceMethod::Auto, false, SurfaceKind::WarpedProduct) => TraceMethod::Clairaut,
        (TraceMethod::Auto, false, _) => TraceMethod::Ode,
        (TraceMethod::Exact, false, _) => {
            return Err(Error::Unsupported("exact traces need a flat band".into()))
        }
        (TraceMethod::Clairaut, _, k) if k != SurfaceKind::WarpedProduct => {
            return Err(Error::Unsupported("Clairaut traces need a warped product".into()))
        }
        (m, _, _) => m,
    })
}

fn finish(surface: &SurfaceModel, start: &GeodesicState, leg: Leg, method: TraceMethod, opts: &TraceOptions) -> Result<TraceResult> {
    let clairaut = (surface.kind() == SurfaceKind::WarpedProduct).then(|| start.clairaut(surface));
    let mut polyline = leg.polyline;
    if opts.polyline && method != TraceMethod::Exact {
        polyline = resample_polyline(&polyline, opts.max_turn);
    }
    Ok(match leg.ending {
        Ending::Exit(st) => TraceResult {
            status: TraceStatus::Exited,
            exit: Some(exit_of(surface, &st)?),
            travel_time: Some(st.arclen - start.arclen),
            polyline,
            clairaut,
            glue_crossings: leg.crossings,
            method,
        },
        Ending::Trapped { presumed } => TraceResult {
            status: TraceStatus::TrappedForward { presumed },
            exit: None,
            travel_time: None,
            polyline,
            clairaut,
            glue_crossings: leg.crossings,
            method,
        },
    })
}

/// Traces the geodesic leaving `bv` until it reaches a free boundary.
pub fn trace_from_boundary(surface: &SurfaceModel, bv: &BoundaryVector, opts: &TraceOptions) -> Result<TraceResult> {
    let start = initial_state(surface, bv)?;
    let method = resolve_method(surface, opts.method)?;
    if bv.theta.abs() == FRAC_PI_2 {
        return Ok(TraceResult {
            status: TraceStatus::Tangent,
            exit: None,
            travel_time: None,
            polyline: endpoints_polyline(&start, None),
            clairaut: (surface.kind() == SurfaceKind::WarpedProduct).then(|| start.clairaut(surface)),
            glue_crossings: 0,
            method,
        });
    }
    let leg = match method {
        TraceMethod::Exact => exact_leg(surface, &start)?,
        TraceMethod::Clairaut => clairaut_leg(surface, &start, opts)?,
        _ => ode_leg(surface, &start, opts)?,
    };
    finish(surface, &start, leg, method, opts)
}

/// Traces from an arbitrary chart state (interior or boundary) forward.
/// Uses the exact route on flat bands and the ODE route otherwise.
pub fn trace_from_state(surface: &SurfaceModel, start: &GeodesicState, opts: &TraceOptions) -> Result<TraceResult> {
    let method = match resolve_method(surface, opts.method)? {
        TraceMethod::Clairaut => TraceMethod::Ode,
        m => m,
    };
    let leg = match method {
        TraceMethod::Exact => exact_leg(surface, start)?,
        _ => ode_leg(surface, start, opts)?,
    };
    finish(surface, start, leg, method, opts)
}

/// State after arclength `ell` along the geodesic from `start`, or `None`
/// when the geodesic leaves the surface first.
pub fn integrate_to_arclength(
    surface: &SurfaceModel,
    start: &GeodesicState,
    ell: f64,
    opts: &TraceOptions,
) -> Result<Option<GeodesicState>> {
    let req = DriveRequest {
        surface,
        opts,
        target: Some(start.arclen + ell),
        sample_step: None,
    };
    let (stop, _) = driver::drive(
        &req,
        [start.t, start.x, start.v_t, start.v_x],
        start.arclen,
        |_, _| {},
        |_, _| {},
        |_| {},
    )?;
    Ok(match stop {
        Stop::Reached { y, arclen } => Some(driver::state_of(&y, arclen)),
        _ => None,
    })
}

/// Forward fate of the geodesic through `state`.
///
/// Warped products are classified analytically from the turning equation
/// `F(t*) = |c|`; flat bands are trapped only along the circles `v_t = 0`.
pub fn classify_trapped(surface: &SurfaceModel, state: &GeodesicState, opts: &TraceOptions) -> Result<TrapVerdict> {
    let component_at = |t: f64| {
        surface
            .component_at(t)
            .map(|c| c.id)
            .ok_or_else(|| Error::Numeric(format!("t={t} is not a free boundary level")))
    };
    if surface.is_flat_band() {
        if state.v_t.abs() <= 1e-12 {
            return Ok(TrapVerdict::TotallyTrapped);
        }
        return match exact_leg(surface, state)?.ending {
            Ending::Exit(e) => Ok(TrapVerdict::Exits {
                component: component_at(e.t)?,
            }),
            Ending::Trapped { .. } => Ok(TrapVerdict::TotallyTrapped),
        };
    }
    let Some(p) = surface.profile().copied() else {
        let opts = opts.without_polyline();
        return Ok(match ode_leg(surface, state, &opts)?.ending {
            Ending::Exit(e) => TrapVerdict::Exits {
                component: component_at(e.t)?,
            },
            Ending::Trapped { presumed } => TrapVerdict::TrappedForward { presumed },
        });
    };
    let c = state.clairaut(surface);
    let a = c.abs();
    let w = p.eval(state.t);
    let mut dir = state.v_t.signum();
    if state.v_t.abs() <= 1e-12 {
        if w.df.abs() <= 1e-12 {
            return Ok(TrapVerdict::TotallyTrapped);
        }
        dir = w.df.signum();
    }
    let mut from = state.t;
    for leg in 0..2 {
        let end = if dir > 0.0 { surface.t_max() } else { surface.t_min() };
        match clairaut::find_turning(&p, from, end, a) {
            Turning::None => {
                return Ok(TrapVerdict::Exits {
                    component: component_at(end)?,
                })
            }
            Turning::Asymptotic(_) => return Ok(TrapVerdict::TrappedForward { presumed: false }),
            Turning::Transversal(ts) => {
                if leg == 1 {
                    return Ok(TrapVerdict::TotallyTrapped);
                }
                from = ts;
                dir = -dir;
            }
        }
    }
    unreachable!()
}

/// Oracle for the fold rule: traces a Möbius-quotient boundary vector in
/// the orientation double cover `[−l, l] × S¹` (deck map
/// `(t, x) ↦ (−t, x + C/2)`) and projects the exit back to the quotient.
pub fn double_cover_exit(surface: &SurfaceModel, bv: &BoundaryVector, opts: &TraceOptions) -> Result<(BoundaryExit, f64)> {
    if surface.kind() != SurfaceKind::MobiusQuotient {
        return Err(Error::Unsupported("double cover oracle is for the Moebius quotient".into()));
    }
    let l = surface.t_max();
    let cover = SurfaceModel::flat_cylinder(-l, l)?.with_circumference(surface.circumference())?;
    let lifted = BoundaryVector::new(1, bv.s, bv.theta);
    let r = trace_from_boundary(&cover, &lifted, &opts.with_method(TraceMethod::Ode).without_polyline())?;
    let e = r
        .exit
        .ok_or_else(|| Error::Numeric("double cover trace did not exit".into()))?;
    let st = e.state;
    let projected = if st.t < 0.0 {
        GeodesicState {
            t: -st.t,
            x: st.x + surface.antipodal_shift(),
            v_t: -st.v_t,
            v_x: st.v_x,
            arclen: st.arclen,
        }
    } else {
        st
    };
    let mut projected = projected;
    projected.t = l;
    Ok((exit_of(surface, &projected)?, r.travel_time.unwrap_or(f64::NAN)))
}
