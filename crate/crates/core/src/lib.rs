//! Numerical laboratory for the Krzyż extremal coefficient problem.
//!
//! A bounded nonvanishing analytic function on the unit disk with the
//! normalization |f| ≤ 1 factors through a singular inner function; the
//! purely atomic ones are parametrized by finitely many boundary atoms
//! (angle θ_j, mass λ_j). This crate computes their Taylor coefficients,
//! maximizes Re a_n over such configurations, and checks the web of
//! identities, polynomial factorizations, boundary-measure statements, and
//! special-function bounds that constrain the extremal problem.
//!
//! Module map:
//! - [`config`]: atom configurations, validation, rotation, JSON I/O.
//! - [`series`]: Taylor coefficients of f = exp(g), products, evaluation.
//! - [`poly`]: complex polynomials, root finding, winding numbers,
//!   trigonometric polynomials and Fejér–Riesz factorization.
//! - [`boundary`]: the boundary density φ, its zeros and level sets, and
//!   the audited integral inequalities.
//! - [`variational`]: stationarity residuals, coefficient identities, and
//!   rational formulas for g and zg′.
//! - [`inner`]: the induced finite Blaschke product, rotation symmetry
//!   detection, Möbius invariance, and the extremality conditions.
//! - [`reconstruct`]: recovery of coefficients from circle zero sets.
//! - [`special`]: Laguerre-based single-atom coefficients, their suprema,
//!   and the restricted two-parameter families.
//! - [`optimizer`]: multistart projected gradient ascent for Re a_n.
//! - [`verify`]: the batch check battery over one configuration.

pub mod boundary;
pub mod config;
pub mod error;
pub mod inner;
pub mod optimizer;
pub mod poly;
pub mod reconstruct;
pub mod series;
pub mod special;
pub mod variational;
pub mod verify;

pub use config::{circular_distance, wrap_angle, Atom, AtomicConfig};
pub use error::{Error, Result};
pub use inner::{blaschke_h, krzyz_condition_check, BlaschkeProduct, MobiusMap};
pub use optimizer::{
    constrained_maximize, maximize, normalize_rotation, objective_and_gradient, sweep_csv,
    sweep_n, MaximizeOptions, NormalizedConfig, OptimizationResult,
};
pub use poly::{build_p, build_q, fejer_riesz, roots, winding_number, ComplexPoly, TrigPolyReal};
pub use series::{f_series, fg_series, g_series, m_n, series_exp, PowerSeries};
pub use special::{beta, beta_sup, laguerre, restricted_problem, rooney_bound};
pub use variational::{first_order_conditions, residual_identity, IdentityKind, StationarityReport};
pub use verify::{battery, battery_filtered, CheckResult, VerificationReport};

pub use num_complex::Complex64;
