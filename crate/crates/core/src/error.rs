use thiserror::Error;

/// Errors raised while reading a case file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid JSON case: {0}")]
    Json(String),
    #[error("missing matrix block `{0}`")]
    MissingBlock(&'static str),
    #[error("unknown bus {bus} referenced by {what}")]
    UnknownBus { bus: usize, what: &'static str },
    #[error("duplicate bus id {0}")]
    DuplicateBus(usize),
    #[error("branch {from}-{to} has non-positive reactance {x}")]
    NonPositiveReactance { from: usize, to: usize, x: f64 },
    #[error("case has no buses")]
    NoBuses,
}

/// Errors raised by network construction and the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("network is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("branch {from}-{to} has zero reactance")]
    ZeroReactance { from: usize, to: usize },
    #[error("slack bus {0} does not exist")]
    UnknownSlack(usize),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("injections are not balanced: sum = {sum:e}")]
    Unbalanced { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("grounded Laplacian is singular")]
    SingularLaplacian,
    #[error("edge {edge} leaves the arcsin domain: z = {value}")]
    Domain { edge: usize, value: f64 },
    #[error("angle recovery failed: {0}")]
    Consistency(String),
    #[error("nominal injection vector is zero")]
    ZeroInjection,
}

pub type Result<T> = std::result::Result<T, Error>;
