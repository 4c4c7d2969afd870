use thiserror::Error;

/// Errors produced by the network model, solvers, oracle and front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("assignment shape {got_layers}x{got_relays} does not match network {layers}x{relays}")]
    DimensionMismatch {
        layers: usize,
        relays: usize,
        got_layers: usize,
        got_relays: usize,
    },

    #[error("{what} index {index} out of range 1..={bound}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("path enumeration needs {paths} paths, cap is {cap}")]
    EnumerationCap { paths: u128, cap: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("relay count m = {m} must lie in 1..={n}")]
    RelayCount { m: usize, n: usize },

    #[error("operation requires {expected}, network has L = {got}")]
    WrongLayerCount { expected: &'static str, got: usize },

    #[error("simplified relay count k = {k} must satisfy 1 <= k < N = {n}")]
    InvalidK { k: usize, n: usize },

    #[error("grid search needs {required} evaluations, budget is {cap}")]
    BudgetExceeded { required: u128, cap: u128 },

    #[error("asymmetric grid search over {axes} axes exceeds the axis cap {cap}")]
    AxisCap { axes: usize, cap: usize },

    #[error("finite-difference step underflows at beta = {0}")]
    StepUnderflow(f64),

    #[error("missing key `{0}`")]
    MissingKey(String),

    #[error("key `{key}`: {reason}")]
    Parse { key: String, reason: String },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
