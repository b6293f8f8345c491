use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

/// Geodesic flow, lens data and integral-geometry checks on surfaces with
/// boundary.
///
/// Surfaces are preset names (see `surfaces list`) or paths to key = value
/// config files.
#[derive(Debug, Parser)]
#[command(name = "lenslab", version)]
pub struct Cli {
    /// Worker threads; 0 uses every available core
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Surface catalog
    Surfaces {
        #[command(subcommand)]
        action: SurfacesCmd,
    },
    /// Build and compare lens tables
    Lens {
        #[command(subcommand)]
        action: LensCmd,
    },
    /// Run a verification suite; exit 1 names the failing check
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Trace one geodesic (or a meridian fan) and dump its polyline
    Trace(TraceArgs),
}

#[derive(Debug, Subcommand)]
pub enum SurfacesCmd {
    /// Print the presets and the config file keys
    List,
}

#[derive(Debug, Subcommand)]
pub enum LensCmd {
    /// Trace every grid node and write the lens table CSV
    Compute {
        #[arg(long, default_value = "flat")]
        surface: String,
        /// `NxM` on every component, or one `NxM` per component separated by commas
        #[arg(long, default_value = "64x33")]
        grid: String,
        #[arg(long, default_value = "lens.csv")]
        out: PathBuf,
    },
    /// Compare two lens tables node by node
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

/// Flags shared by every check.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory for the report and plot CSVs
    #[arg(long, default_value = "lenslab-out")]
    pub out: PathBuf,
    /// Seed recorded in every report row; drives all sampling
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Crofton identity for a test curve: ∫ i(curve, γ) dγ against 4·length
    Crofton {
        #[arg(long, default_value = "flat")]
        surface: String,
        /// `circle:T` or `meridian:X:T0:T1`
        #[arg(long, default_value = "circle:0.5")]
        curve: String,
        /// Boundary quadrature `N_SxN_THETA`
        #[arg(long, default_value = "256x256")]
        grid: String,
        /// Gauss–Legendre nodes along the curve
        #[arg(long, default_value_t = 64)]
        n_tau: usize,
        /// Gauss–Legendre nodes in direction
        #[arg(long, default_value_t = 256)]
        n_phi: usize,
        /// Relative tolerance (the combined quadrature error bound also passes)
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Santaló: boundary integral of travel times against 2π·Area
    Santalo {
        #[arg(long, default_value = "flat")]
        surface: String,
        /// Midpoint nodes in s per component
        #[arg(long, default_value_t = 2)]
        n_s: usize,
        /// Relative tolerance of the adaptive θ quadrature
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo length of a traced geodesic from intersection counts
    Length {
        #[arg(long, default_value = "flat")]
        surface: String,
        /// Boundary vector `comp,s,theta` of the measured geodesic
        #[arg(long, default_value = "0,1.0,0.0")]
        start: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Pass band in standard errors
        #[arg(long, default_value_t = 3.0)]
        tol: f64,
        /// Fraction of runs that must land in the band
        #[arg(long, default_value_t = 0.99)]
        min_pass: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Jacobi fan: ∫ j⁻² per meridian and the area from ∫∫ j
    Jacobi {
        #[arg(long, default_value = "bump")]
        surface: String,
        /// Meridians in the fan
        #[arg(long, default_value_t = 8)]
        fan: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Trapped directions at an interior point, bracketed on a direction sweep
    Trapped {
        #[arg(long, default_value = "cosh")]
        surface: String,
        #[arg(long, default_value_t = 0.5)]
        t0: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 10_000)]
        directions: usize,
        /// Angle tolerance for bracket centers against the Clairaut value
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Möbius band against the capped cylinder: same scattering, TT offset π
    MobiusCap {
        /// Band width l of both surfaces
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value = "64x33")]
        grid: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Shifted bump metrics share their lens data
    BumpFamily {
        /// Shifts to compare against the first (repeatable)
        #[arg(long = "s", action = ArgAction::Append, default_values_t = [0.0, 0.3], allow_negative_numbers = true)]
        shifts: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value = "64x33")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Average intersection angle Θ(θ) under the identity correspondence
    ThetaIdentity {
        #[arg(long, default_value = "cosh")]
        surface: String,
        /// Points of the θ grid on [0, π]
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Auto,
    Exact,
    Clairaut,
    Ode,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, default_value = "flat")]
    pub surface: String,
    /// Boundary vector `comp,s,theta`
    #[arg(long, default_value = "0,0.0,0.0", allow_hyphen_values = true)]
    pub start: String,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Fan of N perpendicular geodesics on component 0 instead of `--start`;
    /// writes `<stem>_<k>.csv` next to `--out`
    #[arg(long, default_value_t = 0)]
    pub fan: usize,
    /// Polyline CSV `t,theta,arclen,segment_tag`
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}
