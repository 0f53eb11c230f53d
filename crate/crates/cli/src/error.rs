use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown check suite `{0}` (expected one of: {list})", list = crate::checks::SUITES.join(", "))]
    UnknownSuite(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: optomech::Error,
    },

    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps a library error; parameter validation failures become config
    /// errors naming the field.
    pub fn from_lib(context: impl Into<String>, e: optomech::Error) -> Self {
        match e {
            optomech::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
            source => CliError::Numerical {
                context: context.into(),
                source,
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::UnknownSuite(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::CheckFailed { .. } => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for optomech::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|e| CliError::from_lib(what, e))
    }
}
