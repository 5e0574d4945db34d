use thiserror::Error;

/// Errors raised across the planner.
///
/// Indices carried by variants are 0-based internally; messages print them
/// 1-based to match the model file convention.
#[derive(Debug, Error)]
pub enum Error {
    #[error("transition row {} is not a probability distribution", .0 + 1)]
    NonStochasticRow(usize),

    #[error("terminal state is not absorbing")]
    TauNotAbsorbing,

    #[error("termination is unreachable from state {}", .0 + 1)]
    UnreachableTermination(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid sensing specification: {0}")]
    InvalidSensing(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation shape does not match the model or action")]
    ShapeMismatch,

    #[error("tracking cost for this model needs a location estimate")]
    MissingEstimate,

    #[error("absorption-time system is singular")]
    SingularSystem,

    #[error("operation requires the simple sensing model")]
    NotSimpleModel,

    #[error("operation requires the continuous Gaussian sensing model")]
    NotContinuousModel,

    #[error("observation has zero likelihood under the predicted belief")]
    ZeroLikelihoodObservation,

    #[error("belief has all its mass on the terminal state")]
    DegenerateTerminalBelief,

    #[error("value function has no alpha vectors")]
    EmptyValueFunction,

    #[error("backup called with no candidate actions")]
    EmptyActionSet,

    #[error("hypotheses are indistinguishable under the given action")]
    IndistinguishableHypotheses,

    #[error("linear program: {0}")]
    Lp(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
