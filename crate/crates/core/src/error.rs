use std::fmt;

use thiserror::Error;

use crate::numeric::Value;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position of a syntax error, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid integer literal `{0}`")]
    InvalidLiteral(String),

    #[error("unbound term `{0}`")]
    UnboundTerm(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("{what} must be non-negative, got {value}")]
    NegativeArgument { what: &'static str, value: Value },

    #[error("syntax error at {location}: {message}")]
    Syntax { location: Location, message: String },

    #[error("unknown identifier `{name}` at {location}")]
    UnknownIdentifier { name: String, location: Location },

    #[error(
        "entry {entry} is not essentially linear in `{term}`: degree {degree} in `{witness}`"
    )]
    NotEssentiallyLinear {
        entry: usize,
        term: String,
        degree: u32,
        witness: String,
    },

    #[error("growth bound violated at step {step}: length {bits} exceeds {bound}")]
    GrowthBoundViolated { step: u64, bits: u64, bound: u64 },

    #[error("length budget exceeded at step {step}: length {bits} exceeds {budget}")]
    BudgetExceeded { step: u64, bits: u64, budget: u64 },

    #[error("evaluation needs more than {limit} steps")]
    StepLimit { limit: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("assembly error at line {line}: {message}")]
    Assembly { line: usize, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            location: Location { line, column },
            message: message.into(),
        }
    }
}
