use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("hyperedge {edge:?} contains a repeated node")]
    RepeatedNode { edge: Vec<usize> },

    #[error("hyperedge {edge:?} has cardinality {got}, need at least 2")]
    CardinalityTooSmall { edge: Vec<usize>, got: usize },

    #[error("node counts differ: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },

    #[error("generator needs 2 <= k <= n, got n={n}, k={k}")]
    BadGeneratorParams { n: usize, k: usize },

    #[error("index {index} out of range 1..={bound} in position {position}")]
    IndexOutOfRange {
        index: usize,
        bound: usize,
        position: usize,
    },

    #[error("{what} would materialize {required} entries, above the cap of {cap} (set HYPEROBS_KRON_CAP to override)")]
    KronCapExceeded {
        what: &'static str,
        required: u128,
        cap: usize,
    },

    #[error("observation stack holds {terms} terms at depth {depth}, above the cap of {cap} (set HYPEROBS_TERM_CAP to override)")]
    TermCapExceeded {
        terms: usize,
        depth: usize,
        cap: usize,
    },

    #[error("prime {p} rejected: {reason}")]
    BadPrime { p: u64, reason: String },

    #[error("sensor set is empty")]
    EmptySensorSet,

    #[error("output matrix row {row} is all zero")]
    ZeroOutputRow { row: usize },

    #[error("simulation blew up at step {step}: component {component} is not finite")]
    SimulationBlowup { step: usize, component: usize },

    #[error("exhaustive search needs {required} rank tests, above the guard of {cap}")]
    SearchGuardExceeded { required: u128, cap: usize },

    #[error("no observable sensor set of size <= {max_size} exists")]
    NoObservableSet { max_size: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
