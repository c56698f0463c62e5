//! Error types.
//!
//! [`ModelError`] covers construction and validation of inputs (bad
//! distributions, malformed tables, shape conflicts); [`SolveError`] covers
//! failures while solving an otherwise valid model. The CLI maps the former
//! to exit code 2 and the latter to exit code 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid distribution parameters: {0}")]
    BadDistribution(String),

    #[error("operation requires a univariate distribution, got {0}")]
    Multivariate(&'static str),

    #[error("operation requires a continuous density, got {0}")]
    NotContinuous(&'static str),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("label set `{0}` is empty or contains duplicates")]
    BadLabels(String),

    #[error("judgments absent: {0}")]
    JudgmentsAbsent(String),

    #[error("probability row {context} sums to {sum}, outside tolerance")]
    BadProbabilityRow { context: String, sum: f64 },

    #[error("non-finite utility at {0}")]
    NonFiniteUtility(String),

    #[error("judgment/game shape conflict: {0}")]
    ShapeConflict(String),

    #[error("table {name} has shape {got:?}, expected {expected:?}")]
    BadTableShape {
        name: String,
        got: Vec<usize>,
        expected: Vec<usize>,
    },

    #[error("game structure mismatch: expected {expected}, got {got}")]
    StructureMismatch { expected: String, got: String },

    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("CK data required: {0}")]
    CommonKnowledgeRequired(String),

    #[error("instance too large for exhaustive BNE: {size} strategy pairs exceed cap {cap}")]
    BneCapExceeded { size: u128, cap: u128 },

    #[error("joint opponent action space of size {size} exceeds cap {cap}; set independence=true")]
    JointSpaceCapExceeded { size: u128, cap: u128 },

    #[error("no pure equilibrium found in any of the {samples} sampled games")]
    AllSamplesSkipped { samples: u64 },

    #[error("mixture component `{component}` failed: {source}")]
    ComponentFailed {
        component: String,
        #[source]
        source: Box<SolveError>,
    },

    #[error("Prop. 1 precondition unmet: estimated attack probability of `{action}` is zero")]
    Prop1PreconditionUnmet { action: String },

    #[error("quadrature failure: residual {residual} above tolerance {tolerance}")]
    QuadratureFailure { residual: f64, tolerance: f64 },
}

pub type ModelResult<V> = Result<V, ModelError>;
pub type SolveResult<V> = Result<V, SolveError>;
