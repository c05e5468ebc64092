use qdist::algebra::AlgebraError;
use qdist::cache::CacheError;
use qdist::expr::ExprError;
use qdist::hopf::HopfError;
use qdist::hyper::HypError;
use qdist::rep::RepError;
use qdist::verify::VerifyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("refused: {0}")]
    Cap(String),
    #[error("cache refused: {0}")]
    Cache(#[from] CacheError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage, parse and parameter errors, 3 for cap refusals.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Cap(_) => 3,
            _ => 2,
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RepError> for CliError {
    fn from(e: RepError) -> Self {
        match e {
            RepError::CapExceeded { .. } => CliError::Cap(format!("{e} (raise --cap)")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        match e {
            HopfError::CapExceeded { .. } => CliError::Cap(format!("{e} (raise --cap)")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HypError> for CliError {
    fn from(e: HypError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Rep(e) => e.into(),
            VerifyError::Hopf(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}
