use thiserror::Error;

/// Errors from the code algebra layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("field modulus {0} is not an odd prime below 2^31")]
    InvalidModulus(u64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("object {0} is not recoverable from any set of servers")]
    Unrecoverable(usize),
    #[error("no symbol supplied for server {0}")]
    MissingSymbol(usize),
    #[error("server {server} out of range for a code with {n} servers")]
    ServerOutOfRange { server: usize, n: usize },
    #[error("object {object} out of range for a code with {k} objects")]
    ObjectOutOfRange { object: usize, k: usize },
}

/// Errors from versioning primitives and the server automaton.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("vector clock dimension mismatch ({0} vs {1})")]
    ClockDimension(usize, usize),
    #[error("tag_max over an empty set")]
    EmptyTagSet,
    #[error("tags {0} and {1} are incomparable")]
    IncomparableTags(String, String),
    #[error("client {client} already has a pending operation")]
    PendingOperation { client: u64 },
    #[error("code error: {0}")]
    Code(#[from] CodeError),
}

/// Errors from the latency analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatencyError {
    #[error("latency graph is malformed: {0}")]
    Graph(String),
    #[error("{0}")]
    Code(#[from] CodeError),
    #[error("placement infeasible: {objects} objects cannot fit on {servers} servers of capacity {capacity}")]
    Infeasible {
        objects: usize,
        servers: usize,
        capacity: usize,
    },
}

/// Errors from loading or validating a scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid code: {0}")]
    Code(#[from] CodeError),
    #[error("invalid latency graph: {0}")]
    Latency(#[from] LatencyError),
}
