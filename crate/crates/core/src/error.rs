use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Values are cloneable so that lazily computed geometry (vertex lists,
/// triangulations) can cache a failed computation alongside a successful one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polytope is unbounded (recession cone contains a nonzero direction)")]
    UnboundedPolytope,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope is not full-dimensional")]
    DegeneratePolytope,
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("half-space {index} has a zero normal")]
    ZeroNormal { index: usize },

    #[error("boundary coefficient b_{index} = {value} is outside [0,1); the pair is not klt")]
    NotKlt { index: usize, value: String },
    #[error("ray {index} is not primitive")]
    NotPrimitive { index: usize },
    #[error("not a log Fano pair: {0}")]
    NotLogFano(String),
    #[error("point lies outside the moment polytope")]
    PointOutsidePolytope,
    #[error("divisor coefficient a_{index} is negative")]
    NegativeCoefficient { index: usize },
    #[error("the linear system of degree {m} has no torus-invariant members (mP contains no lattice point)")]
    EmptyLinearSystem { m: u64 },
    #[error("the pair is already K-semistable (barycenter is the origin)")]
    AlreadySemistable,
    #[error("m*c_{index} is not an integer at degree {m}")]
    NonIntegralDegree { index: usize, m: u64 },

    #[error("graded ideal sequence carries no stabilization certificate")]
    NoCertificate,
    #[error("ideal is zero")]
    ZeroIdeal,
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("combinatorial budget of {budget} elementary operations exceeded")]
    CombinatorialBlowup { budget: u64 },
    #[error("no stabilization index found up to N = {largest_n}")]
    SearchBudgetExceeded { largest_n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Parse {
        location: Option<String>,
        message: String,
    },
    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: Some(location.into()),
            message: message.into(),
        }
    }

    /// Stable variant name, used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnboundedPolytope => "UnboundedPolytope",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegeneratePolytope => "DegeneratePolytope",
            Error::EmptyPolytope => "EmptyPolytope",
            Error::ZeroNormal { .. } => "ZeroNormal",
            Error::NotKlt { .. } => "NotKlt",
            Error::NotPrimitive { .. } => "NotPrimitive",
            Error::NotLogFano(_) => "NotLogFano",
            Error::PointOutsidePolytope => "PointOutsidePolytope",
            Error::NegativeCoefficient { .. } => "NegativeCoefficient",
            Error::EmptyLinearSystem { .. } => "EmptyLinearSystem",
            Error::AlreadySemistable => "AlreadySemistable",
            Error::NonIntegralDegree { .. } => "NonIntegralDegree",
            Error::NoCertificate => "NoCertificate",
            Error::ZeroIdeal => "ZeroIdeal",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::CombinatorialBlowup { .. } => "CombinatorialBlowup",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "ParseError",
            Error::CrossCheck(_) => "CrossCheck",
        }
    }

    /// Budget exhaustion, as opposed to invalid input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::CombinatorialBlowup { .. } | Error::SearchBudgetExceeded { .. }
        )
    }
}
