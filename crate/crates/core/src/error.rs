use crate::dataio::Quarter;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that map failures to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: column `{column}` missing from {file}")]
    MissingColumn { file: String, column: String },

    #[error("parse error in {file}, row {row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },

    #[error("alignment error: {country} has no value at {quarter}")]
    DateGap { country: String, quarter: Quarter },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: need {need} observations, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{country} lacks a series required for {requirement}")]
    Capability {
        country: String,
        requirement: String,
    },

    #[error("design matrix is rank deficient: {0}")]
    SingularDesign(String),

    #[error("degenerate training sample: residual variance is zero")]
    DegenerateTraining,

    #[error("training sample too short: {have} usable observations, need {need}")]
    ShortTraining { have: usize, need: usize },

    #[error("innovation variance not positive at step {t}")]
    SingularInnovation { t: usize },

    #[error("matrix not positive semidefinite at step {t} after {attempts} jitter attempts")]
    Indefinite { t: usize, attempts: u32 },

    #[error("sampler iteration {iter}: {source}")]
    Sampler {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("diagnostic undefined: chain variance is zero")]
    UndefinedDiagnostic,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("aggregation at {origin} is missing members: {missing:?}")]
    MissingMembers {
        origin: Quarter,
        missing: Vec<String>,
    },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_) => ErrorClass::Config,
            MissingColumn { .. } | Parse { .. } | DateGap { .. } | Alignment(_)
            | TooShort { .. } | Domain(_) | Capability { .. } | MissingMembers { .. }
            | Eval(_) | Io(_) | Csv(_) => ErrorClass::Data,
            SingularDesign(_) | DegenerateTraining | ShortTraining { .. }
            | SingularInnovation { .. } | Indefinite { .. } | UndefinedDiagnostic => {
                ErrorClass::Numerical
            }
            Sampler { source, .. } => source.class(),
        }
    }
}
