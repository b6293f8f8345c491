//! Surface catalog: warped-product bands `dt² + F(t)² dx²` over a periodic
//! fiber coordinate `x ∈ [0, C)`, with optional fold (Möbius quotient) or
//! hemisphere cap glued onto one end of the band.

use std::f64::consts::PI;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::GeodesicState;
use crate::quad::{self, QuadOptions};

/// Tolerance for deciding that a state sits on a glued circle.
const GLUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    FlatCylinder,
    WarpedProduct,
    MobiusQuotient,
    CappedCylinder,
}

/// Bump `h(u) = a·exp(1 − 1/(1 − (u/ε)²))` on `|u| < ε`, zero elsewhere,
/// evaluated at `u = shift + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub amplitude: f64,
    pub half_width: f64,
    pub shift: f64,
}

impl BumpProfile {
    pub fn new(amplitude: f64, half_width: f64, shift: f64) -> Self {
        Self {
            amplitude,
            half_width,
            shift,
        }
    }

    /// `|u|` with `h(u) = level`, for `0 < level < a`.
    pub fn level_radius(&self, level: f64) -> Option<f64> {
        if !(level > 0.0 && level < self.amplitude) {
            return None;
        }
        let q = 1.0 / (1.0 - (level / self.amplitude).ln());
        Some(self.half_width * (1.0 - q).sqrt())
    }

    /// `(h, h′, h″)` at `u`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        let eps = self.half_width;
        if u.abs() >= eps {
            return (0.0, 0.0, 0.0);
        }
        let q = 1.0 - (u / eps).powi(2);
        let h = self.amplitude * (1.0 - 1.0 / q).exp();
        let e2 = eps * eps;
        let g = -2.0 * u / (e2 * q * q);
        let dg = -2.0 / (e2 * q * q) - 8.0 * u * u / (e2 * e2 * q * q * q);
        (h, h * g, h * (g * g + dg))
    }

    /// Chart interval `[−s − ε, −s + ε]` carrying the bump.
    pub fn support(&self) -> (f64, f64) {
        (-self.shift - self.half_width, -self.shift + self.half_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpedProfile {
    Bump(BumpProfile),
    /// `F = cosh t`, constant curvature −1.
    Cosh,
}

/// Warping function and its first two derivatives at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Warp {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
}

impl Warp {
    const UNIT: Warp = Warp {
        f: 1.0,
        df: 0.0,
        ddf: 0.0,
    };
}

impl WarpedProfile {
    pub fn eval(&self, t: f64) -> Warp {
        match self {
            WarpedProfile::Bump(b) => {
                let (h, dh, ddh) = b.eval(b.shift + t);
                Warp {
                    f: 1.0 + h,
                    df: dh,
                    ddf: ddh,
                }
            }
            WarpedProfile::Cosh => Warp {
                f: t.cosh(),
                df: t.sinh(),
                ddf: t.cosh(),
            },
        }
    }

    /// `F(t) − F(t0)` without cancellation where a closed form exists.
    pub fn gap(&self, t: f64, t0: f64) -> f64 {
        match self {
            WarpedProfile::Cosh => 2.0 * (0.5 * (t + t0)).sinh() * (0.5 * (t - t0)).sinh(),
            WarpedProfile::Bump(b) => b.eval(b.shift + t).0 - b.eval(b.shift + t0).0,
        }
    }

    /// Lower bound of `F` over the whole chart line.
    pub fn lower_bound(&self) -> f64 {
        1.0
    }

    /// Points where `F` changes character (support edges, extrema); used as
    /// quadrature breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            WarpedProfile::Bump(b) => {
                let (lo, hi) = b.support();
                vec![lo, -b.shift, hi]
            }
            WarpedProfile::Cosh => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub t: f64,
    /// Fiber coordinate, periodic with the surface circumference.
    pub x: f64,
}

impl ChartPoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

/// `(g_tt, g_tx, g_xx)` in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoeffs {
    pub g_tt: f64,
    pub g_tx: f64,
    pub g_xx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryComponent {
    pub id: usize,
    /// Chart level `t` of this boundary circle.
    pub t: f64,
    /// `+1` when the inward normal is `+∂t`, `−1` when it is `−∂t`.
    pub inward: f64,
    pub length: f64,
}

/// Tangent orientation shared by every component: the unit boundary
/// tangent points along `+∂x`.
pub const ORIENTATION: &str = "tangent=+x";

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryAtlas {
    pub components: Vec<BoundaryComponent>,
    pub orientation: &'static str,
}

impl BoundaryAtlas {
    pub fn lengths(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.length).collect()
    }
}

/// Orthonormal frame at a boundary point, as chart vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub point: ChartPoint,
    pub inward_normal: [f64; 2],
    pub tangent: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlueOutcome {
    pub state: GeodesicState,
    pub arclen_added: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    kind: SurfaceKind,
    t_min: f64,
    t_max: f64,
    circumference: f64,
    profile: Option<WarpedProfile>,
}

impl SurfaceModel {
    pub fn new(
        kind: SurfaceKind,
        t_min: f64,
        t_max: f64,
        circumference: f64,
        profile: Option<WarpedProfile>,
    ) -> Result<Self> {
        let s = Self {
            kind,
            t_min,
            t_max,
            circumference,
            profile,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn flat_cylinder(t_min: f64, t_max: f64) -> Result<Self> {
        Self::new(SurfaceKind::FlatCylinder, t_min, t_max, 2.0 * PI, None)
    }

    /// Bump family member on `[−1, 1]` with circumference 2π.
    pub fn bump(amplitude: f64, half_width: f64, shift: f64) -> Result<Self> {
        Self::new(
            SurfaceKind::WarpedProduct,
            -1.0,
            1.0,
            2.0 * PI,
            Some(WarpedProfile::Bump(BumpProfile::new(amplitude, half_width, shift))),
        )
    }

    /// Negatively curved cylinder `dt² + cosh²t dx²` on `[−1, 1]`.
    pub fn cosh_cylinder() -> Self {
        Self::new(
            SurfaceKind::WarpedProduct,
            -1.0,
            1.0,
            2.0 * PI,
            Some(WarpedProfile::Cosh),
        )
        .unwrap()
    }

    /// Flat band `[0, l]` folded onto itself at `t = 0`.
    pub fn mobius(l: f64) -> Result<Self> {
        Self::new(SurfaceKind::MobiusQuotient, 0.0, l, 2.0 * PI, None)
    }

    /// Flat band `[0, l]` with a hemisphere glued along `t = l`.
    pub fn capped(l: f64) -> Result<Self> {
        Self::new(SurfaceKind::CappedCylinder, 0.0, l, 2.0 * PI, None)
    }

    pub fn with_circumference(mut self, circumference: f64) -> Result<Self> {
        self.circumference = circumference;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSurface(m));
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return bad(format!("empty t range [{}, {}]", self.t_min, self.t_max));
        }
        if !(self.circumference.is_finite() && self.circumference > 0.0) {
            return bad(format!("circumference {} must be positive", self.circumference));
        }
        match (self.kind, &self.profile) {
            (SurfaceKind::WarpedProduct, None) => return bad("warped product needs a profile".into()),
            (SurfaceKind::WarpedProduct, Some(_)) => {}
            (_, Some(_)) => return bad(format!("{:?} takes no warping profile", self.kind)),
            (_, None) => {}
        }
        if let Some(WarpedProfile::Bump(b)) = self.profile {
            let eps = b.half_width;
            if !(eps > 0.0 && eps < 0.25) {
                return bad(format!("bump half-width {eps} must lie in (0, 1/4)"));
            }
            if !(b.amplitude >= 0.0 && b.amplitude.is_finite()) {
                return bad(format!("bump amplitude {} must be nonnegative", b.amplitude));
            }
            let (lo, hi) = b.support();
            if !(lo > self.t_min + eps && hi < self.t_max - eps) {
                return bad(format!(
                    "bump support [{lo}, {hi}] must sit at least ε inside [{}, {}]",
                    self.t_min, self.t_max
                ));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn width(&self) -> f64 {
        self.t_max - self.t_min
    }
    pub fn circumference(&self) -> f64 {
        self.circumference
    }
    pub fn profile(&self) -> Option<&WarpedProfile> {
        self.profile.as_ref()
    }

    /// `F ≡ 1` on the whole band.
    pub fn is_flat_band(&self) -> bool {
        self.profile.is_none()
    }

    pub fn warp(&self, t: f64) -> Warp {
        match &self.profile {
            Some(p) => p.eval(t),
            None => Warp::UNIT,
        }
    }

    pub fn fold_at(&self) -> Option<f64> {
        (self.kind == SurfaceKind::MobiusQuotient).then_some(self.t_min)
    }

    pub fn cap_at(&self) -> Option<f64> {
        (self.kind == SurfaceKind::CappedCylinder).then_some(self.t_max)
    }

    /// Radius of the hemisphere whose equator has the band's circumference.
    pub fn cap_radius(&self) -> f64 {
        self.circumference / (2.0 * PI)
    }

    /// Fiber shift applied by both glue rules (the antipodal map).
    pub fn antipodal_shift(&self) -> f64 {
        0.5 * self.circumference
    }

    pub fn wrap_x(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.circumference);
        if w >= self.circumference {
            0.0
        } else {
            w
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t >= self.t_min && t <= self.t_max {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                t_min: self.t_min,
                t_max: self.t_max,
            })
        }
    }

    pub fn metric_coeffs(&self, p: ChartPoint) -> Result<MetricCoeffs> {
        self.check_domain(p.t)?;
        let f = self.warp(p.t).f;
        Ok(MetricCoeffs {
            g_tt: 1.0,
            g_tx: 0.0,
            g_xx: f * f,
        })
    }

    /// Gaussian curvature `−F″/F` on the band.
    pub fn curvature(&self, p: ChartPoint) -> Result<f64> {
        self.check_domain(p.t)?;
        Ok(self.band_curvature(p.t))
    }

    pub(crate) fn band_curvature(&self, t: f64) -> f64 {
        let w = self.warp(t);
        -w.ddf / w.f
    }

    pub fn cap_curvature(&self) -> Option<f64> {
        self.cap_at().map(|_| 1.0 / self.cap_radius().powi(2))
    }

    /// Free boundary circles, in the listed order used for lens tables.
    pub fn boundary(&self) -> BoundaryAtlas {
        let comp = |id, t: f64, inward| BoundaryComponent {
            id,
            t,
            inward,
            length: self.warp(t).f * self.circumference,
        };
        let components = match self.kind {
            SurfaceKind::FlatCylinder | SurfaceKind::WarpedProduct => {
                vec![comp(0, self.t_min, 1.0), comp(1, self.t_max, -1.0)]
            }
            SurfaceKind::MobiusQuotient => vec![comp(0, self.t_max, -1.0)],
            SurfaceKind::CappedCylinder => vec![comp(0, self.t_min, 1.0)],
        };
        BoundaryAtlas {
            components,
            orientation: ORIENTATION,
        }
    }

    pub fn component(&self, id: usize) -> Result<BoundaryComponent> {
        self.boundary()
            .components
            .get(id)
            .copied()
            .ok_or(Error::UnknownComponent(id))
    }

    /// Component whose circle sits at chart level `t`, if any.
    pub fn component_at(&self, t: f64) -> Option<BoundaryComponent> {
        self.boundary()
            .components
            .into_iter()
            .find(|c| (c.t - t).abs() <= GLUE_TOL)
    }

    /// Chart point, inward unit normal and unit tangent at arclength `s`
    /// along component `id` (`s` is taken modulo the component length).
    pub fn boundary_frame(&self, id: usize, s: f64) -> Result<BoundaryFrame> {
        let c = self.component(id)?;
        let f = self.warp(c.t).f;
        let s = s.rem_euclid(c.length);
        Ok(BoundaryFrame {
            point: ChartPoint::new(c.t, self.wrap_x(s / f)),
            inward_normal: [c.inward, 0.0],
            tangent: [0.0, 1.0 / f],
        })
    }

    /// Continues a geodesic across the fold or through the cap.
    ///
    /// Fold at `t = t_min`: `(t, x, v_t, v_x) ↦ (t, x + C/2, −v_t, v_x)`.
    /// Cap at `t = t_max`: same map, plus the half great circle `πR`.
    pub fn glue_map(&self, state: &GeodesicState) -> Result<GlueOutcome> {
        let (level, heading_out, extra) = match self.kind {
            SurfaceKind::MobiusQuotient => (self.t_min, state.v_t < 0.0, 0.0),
            SurfaceKind::CappedCylinder => (self.t_max, state.v_t > 0.0, PI * self.cap_radius()),
            _ => return Err(Error::Glue(format!("{:?} has no glued boundary", self.kind))),
        };
        if (state.t - level).abs() > GLUE_TOL {
            return Err(Error::Glue(format!(
                "state at t={} is not on the glued circle t={level}",
                state.t
            )));
        }
        if !heading_out {
            return Err(Error::Glue("state is not leaving the band through the glued circle".into()));
        }
        Ok(GlueOutcome {
            state: GeodesicState {
                t: level,
                x: self.wrap_x(state.x + self.antipodal_shift()),
                v_t: -state.v_t,
                v_x: state.v_x,
                arclen: state.arclen + extra,
            },
            arclen_added: extra,
        })
    }

    /// Riemannian area, by quadrature of `C·∫F dt` plus the cap hemisphere.
    pub fn area(&self) -> f64 {
        let band = match &self.profile {
            None => self.width(),
            Some(p) => {
                quad::integrate(
                    |t| p.eval(t).f,
                    self.t_min,
                    self.t_max,
                    &p.breakpoints(),
                    QuadOptions {
                        abs_tol: 1e-15,
                        rel_tol: 1e-14,
                        max_intervals: 2000,
                    },
                )
                .value
            }
        };
        let cap = match self.kind {
            SurfaceKind::CappedCylinder => 2.0 * PI * self.cap_radius().powi(2),
            _ => 0.0,
        };
        self.circumference * band + cap
    }

    /// Canonical one-line description, stable across runs.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::descriptor`].
    pub fn descriptor_hash(&self) -> String {
        let digest = Sha256::digest(self.descriptor().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match (self.kind, &self.profile) {
            (SurfaceKind::FlatCylinder, _) => "flat_cylinder".to_string(),
            (SurfaceKind::MobiusQuotient, _) => "mobius_quotient".to_string(),
            (SurfaceKind::CappedCylinder, _) => "capped_cylinder".to_string(),
            (SurfaceKind::WarpedProduct, Some(WarpedProfile::Bump(b))) => format!(
                "warped_bump(a={},eps={},s={})",
                b.amplitude, b.half_width, b.shift
            ),
            (SurfaceKind::WarpedProduct, _) => "warped_cosh".to_string(),
        };
        write!(
            f,
            "{kind};t=[{},{}];C={}",
            self.t_min, self.t_max, self.circumference
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_second(s: &SurfaceModel, t: f64, h: f64) -> f64 {
        (s.warp(t + h).f - 2.0 * s.warp(t).f + s.warp(t - h).f) / (h * h)
    }

    #[test]
    fn metric_examples() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let m = flat.metric_coeffs(ChartPoint::new(0.5, 1.0)).unwrap();
        assert_eq!((m.g_tt, m.g_tx, m.g_xx), (1.0, 0.0, 1.0));

        let cosh = SurfaceModel::cosh_cylinder();
        assert_eq!(cosh.metric_coeffs(ChartPoint::new(0.0, 2.0)).unwrap().g_xx, 1.0);

        let bump = SurfaceModel::bump(0.05, 0.2, 0.0).unwrap();
        let g = bump.metric_coeffs(ChartPoint::new(0.0, 0.3)).unwrap().g_xx;
        assert!((g - 1.1025).abs() < 1e-15);
    }

    #[test]
    fn metric_rejects_points_outside_chart() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!(matches!(
            flat.metric_coeffs(ChartPoint::new(1.5, 0.0)),
            Err(Error::Domain { .. })
        ));
        assert!(flat.curvature(ChartPoint::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn curvature_examples() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert_eq!(flat.curvature(ChartPoint::new(0.3, 2.0)).unwrap(), 0.0);
        let cosh = SurfaceModel::cosh_cylinder();
        for t in [-0.9, 0.0, 0.4] {
            assert!((cosh.curvature(ChartPoint::new(t, 0.0)).unwrap() + 1.0).abs() < 1e-15);
        }
        // independent finite-difference oracle on F at the bump centre
        let bump = SurfaceModel::bump(0.05, 0.2, 0.0).unwrap();
        let k = bump.curvature(ChartPoint::new(0.0, 0.0)).unwrap();
        let fd = -fd_second(&bump, 0.0, 1e-4) / bump.warp(0.0).f;
        assert!(((k - fd) / k).abs() < 1e-6, "{k} vs {fd}");
        // h″(0) = −2a/ε², so K(0) = 2a/(ε²(1+a))
        assert!((k - 2.0 * 0.05 / (0.04 * 1.05)).abs() < 1e-12);
    }

    #[test]
    fn bump_is_flat_off_support() {
        let b = SurfaceModel::bump(0.05, 0.2, 0.3).unwrap();
        for t in [-1.0, -0.5 - 1e-12, 1.0, -0.1 + 1e-12, 0.5] {
            let w = b.warp(t);
            assert_eq!((w.f, w.df), (1.0, 0.0), "t={t}");
        }
        assert!(b.warp(-0.3).f > 1.0);
    }

    #[test]
    fn bump_parameter_constraints() {
        assert!(SurfaceModel::bump(0.05, 0.3, 0.0).is_err());
        assert!(SurfaceModel::bump(0.05, 0.2, 0.6).is_err());
        assert!(SurfaceModel::bump(0.05, 0.2, -0.59).is_ok());
        assert!(SurfaceModel::bump(-0.1, 0.2, 0.0).is_err());
    }

    #[test]
    fn boundary_component_counts_and_lengths() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert_eq!(flat.boundary().components.len(), 2);
        assert_eq!(SurfaceModel::mobius(1.0).unwrap().boundary().components.len(), 1);
        assert_eq!(SurfaceModel::capped(1.0).unwrap().boundary().components.len(), 1);
        let cosh = SurfaceModel::cosh_cylinder().boundary();
        for c in &cosh.components {
            assert!((c.length - 2.0 * PI * 1f64.cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_frames() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        let fr = flat.boundary_frame(0, 0.0).unwrap();
        assert_eq!(fr.point, ChartPoint::new(0.0, 0.0));
        assert_eq!(fr.inward_normal, [1.0, 0.0]);
        assert_eq!(fr.tangent, [0.0, 1.0]);
        assert_eq!(flat.boundary_frame(1, 0.0).unwrap().inward_normal, [-1.0, 0.0]);

        let cap = SurfaceModel::capped(1.0).unwrap();
        let fr = cap.boundary_frame(0, PI).unwrap();
        assert_eq!(fr.point, ChartPoint::new(0.0, PI));
        assert_eq!(fr.inward_normal, [1.0, 0.0]);

        let mob = SurfaceModel::mobius(1.0).unwrap();
        let fr = mob.boundary_frame(0, 2.0 * PI - 0.1).unwrap();
        assert!((fr.point.x - (2.0 * PI - 0.1)).abs() < 1e-15);
        assert!(matches!(mob.boundary_frame(1, 0.0), Err(Error::UnknownComponent(1))));

        let cosh = SurfaceModel::cosh_cylinder();
        let fr = cosh.boundary_frame(1, 1.0).unwrap();
        let f = 1f64.cosh();
        assert!((fr.tangent[1] * f - 1.0).abs() < 1e-15);
        assert!((fr.point.x - 1.0 / f).abs() < 1e-15);
    }

    fn st(t: f64, x: f64, v_t: f64, v_x: f64) -> GeodesicState {
        GeodesicState {
            t,
            x,
            v_t,
            v_x,
            arclen: 0.0,
        }
    }

    #[test]
    fn fold_rule() {
        let mob = SurfaceModel::mobius(1.0).unwrap();
        let vx = (1.0f64 - 0.49).sqrt();
        let out = mob.glue_map(&st(0.0, 1.0, -0.7, vx)).unwrap();
        assert!((out.state.x - (1.0 + PI)).abs() < 1e-15);
        assert_eq!((out.state.v_t, out.state.v_x), (0.7, vx));
        assert_eq!(out.arclen_added, 0.0);
        // folding twice returns the start, with x shifted by C ≡ 0
        let mut back = out.state;
        back.v_t = -back.v_t;
        let twice = mob.glue_map(&back).unwrap().state;
        assert!((twice.x - 1.0).abs() < 1e-14);
        assert_eq!(twice.v_t * twice.v_t + twice.v_x * twice.v_x, 0.49 + vx * vx);
    }

    #[test]
    fn cap_rule() {
        let cap = SurfaceModel::capped(1.0).unwrap();
        let a = PI / 4.0;
        let out = cap.glue_map(&st(1.0, 1.0, a.sin(), a.cos())).unwrap();
        assert!((out.state.x - (1.0 + PI)).abs() < 1e-15);
        assert_eq!((out.state.v_t, out.state.v_x), (-a.sin(), a.cos()));
        assert!((out.arclen_added - PI).abs() < 1e-15);
        let normal = cap.glue_map(&st(1.0, 0.5, 1.0, 0.0)).unwrap();
        assert!((normal.state.x - (0.5 + PI)).abs() < 1e-15);
        assert_eq!(normal.state.v_t, -1.0);
        assert!((normal.arclen_added - PI).abs() < 1e-15);
    }

    #[test]
    fn glue_misuse_is_a_logic_error() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!(matches!(flat.glue_map(&st(0.0, 0.0, -1.0, 0.0)), Err(Error::Glue(_))));
        let mob = SurfaceModel::mobius(1.0).unwrap();
        assert!(mob.glue_map(&st(0.5, 0.0, -1.0, 0.0)).is_err());
        assert!(mob.glue_map(&st(0.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn areas() {
        let flat = SurfaceModel::flat_cylinder(0.0, 1.0).unwrap();
        assert!((flat.area() - 2.0 * PI).abs() < 1e-14);
        let cosh = SurfaceModel::cosh_cylinder();
        assert!((cosh.area() - 4.0 * PI * 1f64.sinh()).abs() < 1e-12);
        let cap = SurfaceModel::capped(1.0).unwrap();
        assert!((cap.area() - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn descriptors_distinguish_family_members() {
        let a = SurfaceModel::bump(0.05, 0.2, 0.0).unwrap();
        let b = SurfaceModel::bump(0.05, 0.2, 0.3).unwrap();
        assert_ne!(a.descriptor_hash(), b.descriptor_hash());
        assert_eq!(a.descriptor_hash(), a.clone().descriptor_hash());
        assert_eq!(a.descriptor_hash().len(), 16);
    }
}
