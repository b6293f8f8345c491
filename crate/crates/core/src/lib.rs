//! Geodesic flow on compact surfaces with boundary: scattering and lens
//! data, integral-geometry identities and Jacobi fields on a small catalog
//! of cylinders, a Möbius band and a capped cylinder.

pub mod config;
pub mod error;
pub mod flow;
pub mod intgeo;
pub mod jacobi;
pub mod lens;
pub mod ode;
pub mod quad;
pub mod report;
pub mod surface;

pub use error::{Error, Result};
pub use flow::{GeodesicState, TraceOptions, TraceResult, TraceStatus, TrapVerdict};
pub use lens::{BoundaryVector, GridSpec, LensTable, ScatterRecord};
pub use surface::{SurfaceKind, SurfaceModel};
