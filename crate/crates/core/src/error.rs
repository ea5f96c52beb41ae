use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    Degree { expected: String, found: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("enumeration cap exceeded: {size} items, cap {cap}")]
    Capacity { size: usize, cap: usize },

    #[error("support is not in Y_beta")]
    NotInY,

    #[error("perturbation too large: {bound} = {value} must be below {limit}")]
    PerturbationTooLarge {
        bound: String,
        value: String,
        limit: String,
    },

    #[error("invalid quot point: {0}")]
    InvalidQuotPoint(String),

    #[error("twist too small: {0}")]
    TwistTooSmall(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("weights violate the SL constraint: sum k_j dim_j = {0}")]
    NotSl(String),

    #[error("filtration is not adapted: gamma = ({0}) is not strictly decreasing")]
    NotAdapted(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal identity failed: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable error name reported by the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Degree { .. } => "DegreeError",
            Error::Degenerate(_) => "DegenerateError",
            Error::Dimension { .. } => "DimensionError",
            Error::Capacity { .. } => "CapacityError",
            Error::NotInY => "NotInYError",
            Error::PerturbationTooLarge { .. } => "PerturbationTooLargeError",
            Error::InvalidQuotPoint(_) => "InvalidQuotPointError",
            Error::TwistTooSmall(_) => "TwistTooSmallError",
            Error::Shape(_) => "ShapeError",
            Error::NotSl(_) => "NotSLError",
            Error::NotAdapted(_) => "NotAdaptedError",
            Error::Invalid(_) => "InvalidInputError",
            Error::Invariant(_) => "InvariantError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
