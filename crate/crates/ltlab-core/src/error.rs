use thiserror::Error;

use crate::scf::DensityMatrixState;

#[derive(Debug, Error)]
pub enum LtError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not bracket the decaying ground state: {0}")]
    BracketFailure(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("mass-one rescaling degenerates at the critical exponent p = 1 + 2/d")]
    DegenerateScaling,

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("denominator vanishes: {0}")]
    ZeroDenominator(String),

    #[error("no sign change of L1/Lsc - 1 on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("SCF did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Box<DensityMatrixState>,
    },

    #[error("density collapsed to zero")]
    CollapseToZero,

    #[error("Gram matrix is singular: {0}")]
    GramSingular(String),

    #[error("degenerate soliton parameters: eta1 must exceed eta2 > 0")]
    DegenerateEta,

    #[error("profile cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LtError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            LtError::InvalidParameter(_) => "InvalidParameter",
            LtError::BracketFailure(_) => "BracketFailure",
            LtError::GridTooSmall(_) => "GridTooSmall",
            LtError::DegenerateScaling => "DegenerateScaling",
            LtError::ConvergenceFailure(_) => "ConvergenceFailure",
            LtError::ZeroDenominator(_) => "ZeroDenominator",
            LtError::NoSignChange { .. } => "NoSignChange",
            LtError::NoConvergence { .. } => "NoConvergence",
            LtError::CollapseToZero => "CollapseToZero",
            LtError::GramSingular(_) => "GramSingular",
            LtError::DegenerateEta => "DegenerateEta",
            LtError::Cache(_) => "Cache",
            LtError::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, LtError>;
