use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration validation failure, naming the offending field.
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    /// A scalar argument violated a documented precondition.
    #[error("invalid argument: {what}")]
    InvalidArgument { what: String },

    /// Contour radius must lie strictly inside (0, 1).
    #[error("contour radius {r} outside (0, 1)")]
    RadiusOutOfRange { r: f64 },

    /// Root finding was asked for the zero polynomial.
    #[error("root finding on the zero polynomial")]
    ZeroPolynomial,

    /// Simultaneous iteration and the companion fallback both failed to
    /// produce roots meeting the residual tolerance.
    #[error("root finding did not converge: worst residual {residual:.3e} (tolerance {tolerance:.3e})")]
    RootsDidNotConverge { residual: f64, tolerance: f64 },

    /// Winding-number sampling hit a point where |p| is below the guard
    /// threshold, so the curve may pass through zero.
    #[error("function vanishes on the unit circle near theta = {theta:.12} (|value| = {magnitude:.3e})")]
    CircleVanishing { theta: f64, magnitude: f64 },

    /// Fejér–Riesz input fails the nonnegativity precondition.
    #[error("trigonometric polynomial is negative: min {min:.3e} at theta = {theta:.12}")]
    NotNonnegative { min: f64, theta: f64 },

    /// Fejér–Riesz found boundary roots that cannot be grouped into
    /// even-multiplicity clusters within the pairing tolerance.
    #[error("odd boundary-root multiplicity: {count} unit-circle roots cannot be paired")]
    UnpairedCircleRoot { count: usize },

    /// Spectral factor degree disagrees with the trigonometric degree.
    #[error("spectral factorization selected {selected} of {expected} roots")]
    FactorizationDegree { selected: usize, expected: usize },

    /// The Blaschke representation does not have the predicted degree;
    /// indicates numerical failure upstream.
    #[error("Blaschke degree mismatch: expected {expected}, found {found} (worst residual {residual:.3e})")]
    BlaschkeDegreeMismatch {
        expected: usize,
        found: usize,
        residual: f64,
    },

    /// A rational-formula denominator is too small at the requested point.
    #[error("denominator of {what} is {magnitude:.3e} at z = {z} (below guard)")]
    SmallDenominator {
        what: &'static str,
        z: Complex64,
        magnitude: f64,
    },

    /// Adaptive quadrature failed to reach its error target on an arc.
    #[error("quadrature did not converge on [{a:.12}, {b:.12}]: error estimate {estimate:.3e}")]
    QuadratureDidNotConverge { a: f64, b: f64, estimate: f64 },

    /// A point expected on the unit circle is not unimodular.
    #[error("point {z} is off the unit circle by {defect:.3e}")]
    OffCircle { z: Complex64, defect: f64 },

    /// The boundary phase was evaluated at (or too close to) an atom.
    #[error("phase function has a pole at theta = {theta:.12} (atom within 1e-12)")]
    AtomPole { theta: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid_argument(what: impl Into<String>) -> Self {
        Error::InvalidArgument { what: what.into() }
    }
}
