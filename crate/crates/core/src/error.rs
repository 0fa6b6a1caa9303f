use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),

    #[error("dimension vector has {got} entries, quiver has {expected} vertices")]
    DimMismatch { expected: usize, got: usize },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("the zero dimension vector is not allowed here")]
    ZeroDimension,

    #[error("quiver is not connected")]
    Disconnected,

    #[error("quiver has no vertices")]
    EmptyQuiver,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration cap of {cap} exceeded")]
    CapExceeded { cap: usize },

    #[error("search budget exceeded: {needed} points requested, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("element is not a unit")]
    NotUnit,

    #[error("ring mismatch: operands live in different truncated rings")]
    RingMismatch,

    #[error("negative arrow count {count} between auxiliary vertices {i} and {j}")]
    NegativeArrowCount { i: usize, j: usize, count: i64 },

    #[error("odd self-extension count {count} at vertex {vertex}; Ext^1 must be even-dimensional")]
    OddLoopCount { vertex: usize, count: i64 },

    #[error("lattice rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("top type is incompatible with the class data: {0}")]
    IncompatibleTopType(String),

    #[error("semisimple types refine different dimension vectors")]
    AmbientMismatch,

    #[error("unsupported category descriptor `{0}`")]
    UnsupportedCategory(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidQuiver(_) => "invalid_quiver",
            Error::DimMismatch { .. } => "dim_mismatch",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::ZeroDimension => "zero_dimension",
            Error::Disconnected => "disconnected",
            Error::EmptyQuiver => "empty_quiver",
            Error::Precondition(_) => "precondition",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NotPrime(_) => "not_prime",
            Error::NotUnit => "not_unit",
            Error::RingMismatch => "ring_mismatch",
            Error::NegativeArrowCount { .. } => "negative_arrow_count",
            Error::OddLoopCount { .. } => "odd_loop_count",
            Error::RankMismatch { .. } => "rank_mismatch",
            Error::IncompatibleTopType(_) => "incompatible_top_type",
            Error::AmbientMismatch => "ambient_mismatch",
            Error::UnsupportedCategory(_) => "unsupported_category",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
