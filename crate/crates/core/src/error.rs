use std::fmt;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index cardinality must be at least 1 (index `{0}`)")]
    ZeroCardinality(String),

    #[error("duplicate index `{0}`")]
    DuplicateIndex(String),

    #[error("index `{name}` has cardinality {left} in one operand and {right} in another")]
    CardinalityMismatch { name: String, left: usize, right: usize },

    #[error("output index `{0}` does not appear in any operand")]
    MissingIndex(String),

    #[error("shape mismatch: expected [{expected}], found [{found}]")]
    ShapeMismatch { expected: String, found: String },

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at offset {0}")]
    NonFinite(usize),

    #[error("negative value {value} at offset {offset} in a non-negative tensor")]
    Negative { offset: usize, value: f64 },

    #[error("division of {numerator} by zero at cell {cell:?}")]
    Domain { cell: Vec<usize>, numerator: f64 },

    #[error("singular model{}: observed cell {cell:?} has a positive count but zero intensity", IterSuffix(*.iteration))]
    Singular { iteration: Option<usize>, cell: Vec<usize> },

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("latent configuration count {count} exceeds the limit {limit}")]
    TooLarge { count: usize, limit: usize },

    #[error("auc needs at least one positive and one negative label")]
    SingleClass,

    #[error("holdout split has no test cells")]
    EmptyTestSet,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("fit for order {order}, restart {restart} failed: {source}")]
    Sweep {
        order: usize,
        restart: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach the iteration index to a singular-model error.
    pub(crate) fn at_iteration(self, iter: usize) -> Error {
        match self {
            Error::Singular { cell, .. } => Error::Singular {
                iteration: Some(iter),
                cell,
            },
            Error::Domain { cell, .. } => Error::Singular {
                iteration: Some(iter),
                cell,
            },
            other => other,
        }
    }

    /// True for errors caused by the numerical state of a fit rather than by its inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::Domain { .. } | Error::NonFinite(_) => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

struct IterSuffix(Option<usize>);

impl fmt::Display for IterSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(it) => write!(f, " at iteration {it}"),
            None => Ok(()),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
