use thiserror::Error;

/// Errors raised by the scattering pipeline.
///
/// Variants split into two families: input problems (bad files, violated
/// preconditions on user data) and numerical failures. [`Error::exit_code`]
/// maps them onto the CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: {0}; raise the grid size")]
    Resolution(String),

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    #[error("inconsistency error: {0}")]
    Inconsistency(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at_level(self, level: i64) -> Self {
        Error::AtLevel {
            level,
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's data rather than by numerics.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Input(_) | Error::Domain(_) | Error::Parse { .. } | Error::Io(_) => true,
            Error::AtLevel { source, .. } => source.is_input(),
            _ => false,
        }
    }

    /// CLI exit code: 2 for input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_input() {
            2
        } else {
            3
        }
    }
}
