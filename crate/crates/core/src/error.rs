use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown parent node `{parent}`")]
    DanglingParent { line: usize, parent: String },
    #[error("line {line}: duplicate node id `{id}`")]
    DuplicateNode { line: usize, id: String },
    #[error("line {line}: information set {infoset} has mismatched action lists")]
    ActionMismatch { line: usize, infoset: String },
    #[error("line {line}: chance probabilities sum to {sum}, expected 1")]
    ProbabilitySum { line: usize, sum: f64 },
    #[error("line {line}: payoff vector has {found} entries, expected {expected}")]
    PayoffArity {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("construction breaks perfect recall at information set {0}")]
    Construction(String),
    #[error("normal form too large: {count} joint profiles exceeds cap {cap}")]
    NormalFormTooLarge { count: f64, cap: usize },
    #[error("perturbation family for player {player} exceeds cap {cap}")]
    FamilyCap { player: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown sequence: {0}")]
    UnknownSequence(String),
    #[error("input must be strictly positive: {0}")]
    NotInterior(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("singular jacobian: {0}")]
    Singular(String),
    #[error("trace did not converge: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
