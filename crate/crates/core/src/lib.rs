//! Electromagnetic mode structure and spontaneous-emission rates for a
//! z-oriented dipole near the focus of a parabolic metallic mirror.
//!
//! The mirror occupies the paraboloid `eta = f` in parabolic coordinates
//! (focal length `f`, focus at the origin, vertex at `(0, 0, -f)`). An
//! emitter with its transition dipole along the mirror axis couples to a
//! continuum of transverse modes labelled on the direction sphere; the
//! mirror turns the travelling plane waves into standing waves that vanish
//! at the vertex, which modifies the decay rate by the dimensionless
//! factor `eta = rate / free_space_rate`.
//!
//! The crate is organised around that calculation:
//!
//! - [`geometry`]: Cartesian/parabolic coordinates, the mirror surface,
//!   directions and transverse polarization vectors on the sphere.
//! - [`quadrature`]: deterministic adaptive integration over intervals and
//!   the direction sphere, with error estimates.
//! - [`modes`]: continuous and boundary-quantized mode functions, the
//!   quantization condition, and angular-spectrum evaluation of the vector
//!   mode field.
//! - [`emission`]: free-space rate, the closed-form on-axis correction, the
//!   full quadrature rate, cutoff corrections, and axial scans.
//! - [`pattern`]: collimated far-field interference pattern on a screen.
//! - [`verify`]: self-checks comparing independent computational routes.
//!
//! All lengths are carried in whatever unit the caller fixes (the CLI uses
//! millimeters); the physics depends only on the dimensionless products
//! `k*f` and `k*(z+f)`.
//!
//! With the default `parallel` feature, scans and pattern grids distribute
//! points over a rayon pool; without it the same code runs sequentially.
//! Both paths produce bit-identical results.

pub mod emission;
pub mod geometry;
pub mod modes;
pub mod parallel;
pub mod pattern;
pub mod quadrature;
pub mod vec3;
pub mod verify;

pub use emission::{AtomPosition, EmissionResult, ScanPoint, ScanResult};
pub use geometry::{CartesianPoint, Direction, ParabolicPoint, PolarizationPair};
pub use modes::{ContinuousModeIndex, DiscreteModeIndex, MirrorSpec, ModeFieldSample};
pub use pattern::{PatternCell, PatternResult, ScreenGrid};
pub use quadrature::{IntegralResult, QuadratureSpec};

/// Errors reported by the library's fallible operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("parabolic coordinates require xi >= 0 and eta >= 0, got xi={xi}, eta={eta}")]
    NegativeParabolic { xi: f64, eta: f64 },
    #[error("polar angle {theta} is singular (theta must lie strictly inside (0, pi))")]
    SingularTheta { theta: f64 },
    #[error("focal product kf = {kf} too small: discrete modes need kf > 1/2")]
    FocalProductTooSmall { kf: f64 },
    #[error("mirror parameters must be positive, got f={f}, k={k}")]
    InvalidMirror { f: f64, k: f64 },
    #[error("parabolic radial coordinate must be positive, got eta={eta}")]
    NonPositiveRadial { eta: f64 },
    #[error("distance parameter a = k(z+f) must be nonnegative, got {a}")]
    NegativeDistance { a: f64 },
    #[error("position lies outside the mirror region (eta = {eta} > f = {f})")]
    OutsideMirror { eta: f64, f: f64 },
    #[error("scan grid invalid: {0}")]
    InvalidScan(String),
    #[error("screen grid invalid: {0}")]
    InvalidGrid(String),
    #[error("quadrature spec invalid: {0}")]
    InvalidQuadratureSpec(String),
    #[error("quadrature did not converge: estimate {value} with error bound {error}")]
    QuadratureNonconvergence { value: f64, error: f64 },
    #[error("mode index invalid: {0}")]
    InvalidModeIndex(String),
}

pub type Result<T> = std::result::Result<T, Error>;
