use thiserror::Error;

/// Errors produced by the estimators, selectors and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KdeError {
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("value {value} lies outside [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("selector failed: {0}")]
    SelectorFailed(String),
    #[error("stage {stage} produced a non-positive or non-finite bandwidth ({value})")]
    StageFailed { stage: String, value: f64 },
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error("sample mass outside the domain mask: {0}")]
    MaskMass(String),
    #[error("evaluation grid does not cover the target: mass outside is {0:.3e}")]
    GridCoverage(f64),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl KdeError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        KdeError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            KdeError::EmptySample
                | KdeError::NonFinite
                | KdeError::InvalidParameter { .. }
                | KdeError::OutOfDomain { .. }
                | KdeError::LengthMismatch { .. }
                | KdeError::MaskMass(_)
                | KdeError::GridCoverage(_)
                | KdeError::UnknownCase(_)
                | KdeError::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, KdeError>;
