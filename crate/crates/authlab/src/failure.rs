//! Error type of the command-line tool and its exit codes.

use std::fmt::Display;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_STAGE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0:#}")]
    Config(anyhow::Error),
    #[error("data error: {0:#}")]
    Data(anyhow::Error),
    #[error("stage failure: {0:#}")]
    Stage(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl Display) -> Self {
        Failure::Config(anyhow::anyhow!("{msg}"))
    }

    pub fn data(msg: impl Display) -> Self {
        Failure::Data(anyhow::anyhow!("{msg}"))
    }

    pub fn stage(msg: impl Display) -> Self {
        Failure::Stage(anyhow::anyhow!("{msg}"))
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Failure::Config(_))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Data(_) => EXIT_DATA,
            Failure::Stage(_) => EXIT_STAGE,
        }
    }

    /// Prefix the message with `context`, keeping the category.
    pub fn context(self, context: impl Display + Send + Sync + 'static) -> Self {
        match self {
            Failure::Config(e) => Failure::Config(e.context(context)),
            Failure::Data(e) => Failure::Data(e.context(context)),
            Failure::Stage(e) => Failure::Stage(e.context(context)),
        }
    }
}

impl From<authlab_core::Error> for Failure {
    fn from(e: authlab_core::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Data(e.into())
        }
    }
}

/// Failing to write an artifact is a stage failure.
pub fn write_failure(path: &std::path::Path, e: impl Display) -> Failure {
    Failure::stage(format!("cannot write `{}`: {e}", path.display()))
}
