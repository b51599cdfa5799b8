use std::path::PathBuf;

use qkd_lsm_core::LsmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `section.key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { key: String, line: usize },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("fixture {}: {reason}", path.display())]
    Invalid { path: PathBuf, reason: String },
    #[error("no fixture files configured (set fixtures.room_dcr, fixtures.room_eff, fixtures.low_dcr or fixtures.low_eff)")]
    NoneConfigured,
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("refusing to write an empty table")]
    EmptyTable,
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv encoding failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Numerical(#[from] LsmError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output(_) => 1,
            Self::Fixture(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}
