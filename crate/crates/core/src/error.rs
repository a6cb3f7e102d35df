use crate::structure::Structure;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("relation `{name}` expects arity {expected}, got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),

    #[error("tuple {tuple:?} is outside the universe [1,{universe}]")]
    TupleOutOfRange { tuple: Vec<usize>, universe: usize },

    #[error("injection is not injective or has an unsorted domain: {0}")]
    NotInjective(String),

    #[error("image of the injection leaves the universe [1,{universe}]")]
    ImageOutOfUniverse { universe: usize },

    #[error("{subset:?} is not a subset of [1,{universe}]")]
    NotSubset { subset: Vec<usize>, universe: usize },

    #[error("size {n} exceeds the configured cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("search space too large: {free} free tuples at once")]
    SearchTooLarge { free: usize },

    #[error("no embedding found within bound {bound}")]
    BoundExhausted { bound: usize },

    #[error("reference structure has only {available} points, {requested} requested")]
    ReferenceTooSmall { requested: usize, available: usize },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("subset of size {size} exceeds the source arity {max_arity}")]
    ArityExceeded { size: usize, max_arity: usize },

    #[error("no amalgam in the class for subset {subset:?}")]
    AmalgamationFailure {
        subset: Vec<usize>,
        family: Vec<Structure>,
    },

    #[error("family is not pairwise compatible: {0}")]
    IncompatibleFamily(String),

    #[error("structure is not a member of the class: {0}")]
    NotInClass(String),

    #[error("conditioning event at step {step} has mass {mass:e}, below the floor")]
    ZeroProbabilityConditioning { step: usize, mass: f64 },

    #[error("age-indexed law has no table for the reference prefix of size {0}")]
    MissingTable(usize),

    #[error("insufficient counts for a chi-square test: {0}")]
    InsufficientCounts(String),

    #[error("invalid decision rule: {0}")]
    InvalidRule(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
