//! Exact constructions for the coboundary equation `f = g − g∘T` on `[0, 1)`.
//!
//! Everything is computed in arbitrary-precision rationals: step functions,
//! piecewise translations, Rokhlin-type towers built by cutting and stacking,
//! and the transfer functions they produce. Irrational quantities only appear
//! as certified brackets in [`numeric`].

pub mod analysis;
pub mod measure;
pub mod numeric;
pub mod scalar;
pub mod solver;
pub mod towers;

pub use measure::{Interval, IntervalSet, PiecewiseTranslation, StepFunction};
pub use scalar::Scalar;

/// Every failure the library can report. Mathematical negatives (a refuted
/// candidate, an unbalanced function) are ordinary return values, not errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid interval {0}")]
    InvalidInterval(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point {0} is outside the domain of the transformation")]
    PointOutsideDomain(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("transformation is not bijective: {0}")]
    NotBijective(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unbalanced input: integral is {0}, expected 0")]
    UnbalancedInput(String),
    #[error("function is not two-valued with opposite signs: {0}")]
    NotTwoStep(String),
    #[error("invalid base solution: {0}")]
    InvalidBaseSolution(String),
    #[error("function is not a finite step function: {0}")]
    NonFiniteStep(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("table too short: {0}")]
    TableTooShort(String),
    #[error("summability condition violated: {0}")]
    Eqn2Violated(String),
    #[error("exponent not representable: {0}")]
    ExponentNotRepresentable(String),
    #[error("epsilon infeasible: {0}")]
    InfeasibleEpsilon(String),
    #[error("invalid convergents: {0}")]
    InvalidConvergents(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("branch limit of {limit} exceeded ({count} branches)")]
    BranchLimit { limit: usize, count: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
