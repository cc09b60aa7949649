use std::fmt;

/// Exit code for bad flags or config.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for a failed numeric computation.
pub const EXIT_NUMERIC: i32 = 3;
/// Exit code for an I/O failure while writing output.
pub const EXIT_IO: i32 = 4;
/// Exit code of `validate --strict` when a check fails.
pub const EXIT_VALIDATION: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric {
        quantity: String,
        source: skyline_core::Error,
    },
    Io(std::io::Error),
    ValidationFailed {
        failed: usize,
        total: usize,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric { .. } => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
            CliError::ValidationFailed { .. } => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Numeric { quantity, source } => write!(f, "numeric failure computing {quantity}: {source}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
            CliError::ValidationFailed { failed, total } => write!(f, "{failed} of {total} validation checks failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Names the quantity a core computation was producing.
pub trait Quantity<T> {
    fn quantity<S: fmt::Display>(self, name: S) -> Result<T, CliError>;
}

impl<T> Quantity<T> for skyline_core::Result<T> {
    fn quantity<S: fmt::Display>(self, name: S) -> Result<T, CliError> {
        self.map_err(|source| match source {
            skyline_core::Error::Io(e) => CliError::Io(e),
            source => CliError::Numeric {
                quantity: name.to_string(),
                source,
            },
        })
    }
}
