use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("input error: {0}")]
    Input(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{method} selected no features; refit with a smaller lambda")]
    EmptySelection { method: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("model failure: {0}")]
    Model(String),

    #[error("hyperparameter search failed: {0}")]
    Search(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end:
    /// 1 configuration, 2 data, 3 model failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Schema(_)
            | Error::Parse { .. }
            | Error::Input(_)
            | Error::Stratification(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::EmptySelection { .. }
            | Error::UndefinedMetric(_)
            | Error::Model(_)
            | Error::Search(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
