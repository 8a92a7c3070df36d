use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification of an [`Error`], used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Shapes of the inputs do not agree.
    Dimension,
    /// Inputs are malformed independently of any theorem hypothesis.
    InvalidInput,
    /// A mathematical hypothesis (positivity, norm one, `Te >= e`, ...) fails.
    Hypothesis,
    /// The numerical machinery could not produce an answer.
    Solver,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shifted-ball cone needs a non-zero apex")]
    ZeroApex,

    #[error("expected a vector of norm one, found norm {norm}")]
    NotUnitNorm { norm: f64 },

    #[error("expected a vector of norm greater than one, found norm {norm}")]
    NormTooSmall { norm: f64 },

    /// A stated hypothesis fails; `witness` is a concrete vector (or entry
    /// position) exhibiting the failure.
    #[error("hypothesis violated: {reason}")]
    Hypothesis { reason: String, witness: Vec<f64> },

    #[error("column criterion fails for k={k}, j={j}, sign {sign}: lhs {lhs} < rhs {rhs}")]
    CriterionViolated {
        k: usize,
        j: usize,
        sign: char,
        lhs: f64,
        rhs: f64,
    },

    #[error("krein map denominator {value} is not positive; the functional is not positive")]
    NonPositiveDenominator { value: f64 },

    #[error("no dual-cone eigenvector found within tolerance (best residual {best_residual:e})")]
    NoDualEigenvector { best_residual: f64 },

    #[error("operators {i} and {j} do not commute: commutator norm {norm:e}")]
    NotCommuting { i: usize, j: usize, norm: f64 },

    #[error("common eigenspace is numerically empty (smallest singular value {smallest:e}, threshold {threshold:e})")]
    EmptyIntersection { smallest: f64, threshold: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("eigensolver did not converge")]
    EigenNonConvergence,

    #[error("instance generation failed after {attempts} attempts: {predicate}")]
    GenerationFailed { attempts: usize, predicate: String },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. } => ErrorClass::Dimension,
            Error::InvalidInput(_) | Error::ZeroApex => ErrorClass::InvalidInput,
            Error::NotUnitNorm { .. }
            | Error::NormTooSmall { .. }
            | Error::Hypothesis { .. }
            | Error::CriterionViolated { .. }
            | Error::NonPositiveDenominator { .. }
            | Error::NotCommuting { .. } => ErrorClass::Hypothesis,
            Error::NoDualEigenvector { .. }
            | Error::EmptyIntersection { .. }
            | Error::Lp(_)
            | Error::EigenNonConvergence
            | Error::GenerationFailed { .. } => ErrorClass::Solver,
        }
    }

    pub(crate) fn hypothesis(reason: impl Into<String>, witness: Vec<f64>) -> Self {
        Error::Hypothesis {
            reason: reason.into(),
            witness,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
