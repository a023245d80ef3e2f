use thiserror::Error;

/// Every fallible operation in this crate returns this error type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid posterior: {0}")]
    InvalidPosterior(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("action {gamma} is more than half a grid cell away from the action grid (nearest {nearest})")]
    GridSnap { gamma: f64, nearest: f64 },
    #[error("LP has {vars} variables, above the cap of {cap}")]
    SizeLimit { vars: usize, cap: usize },
    #[error("LP infeasible: {0}")]
    Infeasible(String),
    #[error("LP unbounded (internal error)")]
    Unbounded,
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("input is not pairwise: action row {action} has {states} support states")]
    PairwiseRequired { action: usize, states: usize },
    #[error("ill-posed query: {0}")]
    IllPosed(String),
    #[error("contact set is not strictly single-dipped: {0}")]
    NotStrictlyDipped(String),
    #[error("shooting failed: {0}")]
    ShootingFailed(String),
    #[error("step size underflow at y = {y}")]
    StiffStep { y: f64 },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("parameter '{param}' = {value} outside {range}")]
    ParamOutOfRange { param: String, value: String, range: String },
    #[error("parse error in field '{field}'{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Parse { field: String, line: Option<usize>, msg: String },
    #[error("schema version {found} not supported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u64 },
    #[error("shape mismatch for '{field}': expected {expected}, found {found}")]
    ShapeMismatch { field: String, expected: String, found: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn parse(field: &str, msg: impl Into<String>) -> Self {
        Error::Parse { field: field.to_string(), line: None, msg: msg.into() }
    }
}
