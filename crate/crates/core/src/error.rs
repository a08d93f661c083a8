use thiserror::Error;

use crate::exact::ComplexRational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("zero raised to the negative power {0}")]
    ZeroToNegativePower(i64),

    #[error("test function is not evaluable at {point}")]
    NotEvaluable { point: i64 },

    #[error("operation requires a non-zero measure")]
    ZeroMeasure,

    /// The rational interval for `frac(n * alpha)` is too wide to decide the
    /// requested question with the supplied convergents.
    #[error("insufficient convergent depth at n = {n}: have {depth}, need at least {needed}")]
    InsufficientDepth { n: i64, depth: usize, needed: usize },

    #[error("no admissible time within search bound {bound}: {reason}")]
    Unsatisfiable { bound: u64, reason: String },

    #[error("incompatible character constraint: {0}")]
    IncompatibleConstraint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not an eigen-chain: residual values {residual:?}")]
    NotEigenChain { residual: Vec<ComplexRational> },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
