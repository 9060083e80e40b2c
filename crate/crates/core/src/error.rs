use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("variable {0} occurs in no atom")]
    Unsafe(String),

    #[error("relation {relation} used with arity {found}, expected {expected}")]
    ArityConflict { relation: String, expected: usize, found: usize },

    #[error("duplicate head variable {0}")]
    DuplicateHeadVar(String),

    #[error("aggregate variable {0} is also a group-by variable")]
    AggregateInGroupBy(String),

    #[error("annotation `{annotation}` is not an element of the {semiring} semiring")]
    AnnotationMismatch { annotation: String, semiring: String },

    #[error("comparisons are unsatisfiable")]
    Unsatisfiable,

    #[error("distinct constants {0} and {1} are forced equal")]
    ConstantClash(String, String),

    #[error("expected an equality-free comparison set, found {0}")]
    EqualityPresent(String),

    #[error("expected a {expected} query")]
    WrongQueryKind { expected: &'static str },

    #[error("group-by arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("{what}: {actual} exceeds the bound of {limit}")]
    BoundExceeded { what: &'static str, limit: u128, actual: u128 },

    #[error("{0}")]
    Precondition(String),
}
