//! Integral-geometry checks: intersection counts, Crofton and Santaló
//! identities, length recovery, intersection-number differences, trapped
//! direction measure and the averaged-angle identity.

mod angle;
mod count;
mod crofton;
mod santalo;
mod sweep;
mod trapped;

pub use angle::{average_angle_identity, theta_grid, AngleReport};
pub use count::{count_band, count_circle, count_intersections, count_meridian, IntersectionReport, ENDPOINT_GUARD, MIN_CROSSING_SINE};
pub use crofton::{crofton_check, length_via_crofton, CroftonGrid, CroftonReport, CurveSpec, LENGTH_CHUNK};
pub use santalo::{santalo_check, SantaloReport};
pub use sweep::{difference_sweep, intersection_difference, random_boundary_vector, DifferenceReport, DifferenceSample};
pub use trapped::{trapped_measure, Bracket, TrappedMeasure};

/// A numerical estimate with its error bar. `seed` is set for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub error: f64,
    pub samples: usize,
    pub seed: Option<u64>,
}
