use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("index {index} exceeds n = {n}")]
    IndexExceedsN { index: usize, n: usize },

    #[error("Bahadur correlations are undefined for w1 = {0}")]
    BahadurUndefined(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("infeasible moments: {0}")]
    Infeasible(String),

    #[error("degenerate simplex {0:?}")]
    DegenerateSimplex(Vec<usize>),

    #[error("supporting 4-set {0:?} does not match any facet family")]
    UnexpectedFacet(Vec<usize>),

    #[error("zero denominator in extremal masses (apex {apex}, index {index})")]
    ZeroDenominator { apex: usize, index: usize },

    #[error("no simplex of the subdivision contains the query point")]
    NoContainingSimplex,

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
