use thiserror::Error;

/// Errors raised by every module of the toolkit.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid partial injection: {0}")]
    InvalidPartialInjection(String),

    #[error("capacity exceeded for {what}: limit {limit}")]
    Capacity { what: String, limit: usize },

    #[error("not a homomorphism: relator {relator} violated")]
    NotAHomomorphism { relator: String },

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("group is not abelian")]
    NotAbelian,

    #[error("generators do not generate the group (closure {closure} of {order})")]
    NonGenerating { closure: usize, order: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("not an action: {0}")]
    NotAnAction(String),

    #[error("no qualifying witness: {0}")]
    NoWitness(String),

    #[error("empty density window: no integer c with {alpha}*{order} <= c <= {beta}*{order}")]
    WindowEmpty {
        order: usize,
        alpha: String,
        beta: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out of regime: epsilon {epsilon} >= kappa^4/200 = {threshold}")]
    OutOfRegime { epsilon: f64, threshold: f64 },

    #[error("homomorphism is not surjective (image {image} of {order})")]
    NotSurjective { image: usize, order: usize },

    #[error("arity mismatch: expected {expected} generators, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
