use thiserror::Error;

/// Errors raised by the measure library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("labelings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("labelings have different class counts ({0} vs {1})")]
    ClassCountMismatch(usize, usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("a labeling needs at least one element and two classes")]
    DegenerateLabeling,
    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("confusion matrix must be square with at least 2 classes, got {0} entries")]
    BadShape(usize),
    #[error("confusion matrix has a negative entry")]
    NegativeEntry,
    #[error("confusion matrix is empty (total mass is zero)")]
    EmptyMatrix,
    #[error("margin sums disagree: {0} vs {1}")]
    MarginMismatch(String, String),
    #[error("enumeration budget of {limit} states exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("measure {measure} cannot be evaluated on {classes} classes without averaging")]
    Arity { measure: String, classes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown measure identifier: {0}")]
    UnknownMeasure(String),
    #[error("baseline expectation undefined for unary predicted class sizes")]
    UnaryBaseline,
    #[error("grid point ({0}, {1}) lies on the boundary of the unit square")]
    GridOnBoundary(String, String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
