use thiserror::Error;

use crate::logic::Var;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input text.
    Format,
    /// Well-formed input that the requested query cannot be answered on.
    Semantic,
    /// A desk-scale limit was exceeded.
    Capacity,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("literal {lit} out of range for {var_count} variables")]
    LiteralOutOfRange { lit: i64, var_count: u32 },

    #[error("variable {0} is not part of the vtree")]
    UnknownVariable(Var),

    #[error("assignment does not bind variable {0}")]
    IncompleteAssignment(Var),

    #[error("variable {0} bound twice with conflicting values")]
    ConflictingBinding(Var),

    #[error("invalid weight {weight} for literal {lit}")]
    InvalidWeight { lit: String, weight: String },

    #[error("circuit property violated: {0}")]
    Property(#[from] crate::nnf::PropertyViolation),

    #[error("{what} needs at most {limit} variables, got {actual}")]
    TooManyVariables { what: &'static str, limit: u32, actual: u32 },

    #[error("circuit is unsatisfiable")]
    Unsatisfiable,

    #[error("empty variable list")]
    EmptyVariables,

    #[error("invalid vtree: {0}")]
    InvalidVtree(String),

    #[error("nodes from different managers")]
    ManagerMismatch,

    #[error("vtree is not constrained for the requested variable split")]
    NotConstrained,

    #[error("operation needs a right-linear (OBDD) vtree")]
    NotObdd,

    #[error("invalid Bayesian network: {0}")]
    InvalidNetwork(String),

    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,

    /// Rows are numbered from 1.
    #[error("dataset row {row} falsifies the circuit")]
    FalsifyingRow { row: usize },

    #[error("unknown variable name {0:?}")]
    UnknownName(String),

    #[error("dataset row {row} has probability zero")]
    ZeroProbabilityRow { row: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("decision function is constant")]
    ConstantFunction,

    #[error("{0} out of supported range")]
    OutOfRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::LiteralOutOfRange { .. }
            | Error::InvalidVtree(_)
            | Error::InvalidNetwork(_)
            | Error::InvalidModel(_)
            | Error::UnknownName(_)
            | Error::InvalidWeight { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Format,
            Error::TooManyVariables { .. } | Error::OutOfRange(_) => ErrorKind::Capacity,
            _ => ErrorKind::Semantic,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
