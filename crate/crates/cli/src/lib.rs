//! Command-line front end for `mb-darboux`: scenario configs in, field tables,
//! residual reports, errata and convergence tables out.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | verification failed (a residual or convergence order missed its tolerance) |
//! | 2 | invalid configuration or command line, reported with a field path |
//! | 3 | singular evaluation point, reported with its location |
//! | 4 | file input/output failure |

pub mod commands;
pub mod config;

use std::path::PathBuf;

pub use commands::{run, Command, Outcome};
pub use config::{ConfigError, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SINGULARITY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),

    #[error("singular evaluation: {0}")]
    Singularity(mb_darboux::Error),

    #[error("evaluation failed: {0}")]
    Evaluation(mb_darboux::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Singularity(_) => EXIT_SINGULARITY,
            CliError::Evaluation(e) if matches!(e.root(), mb_darboux::Error::ConvergenceOrderTooLow { .. }) => EXIT_VERIFY_FAILED,
            // the remaining library errors reject what the scenario asks for
            CliError::Evaluation(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<mb_darboux::Error> for CliError {
    fn from(e: mb_darboux::Error) -> Self {
        if e.is_singularity() {
            CliError::Singularity(e)
        } else {
            CliError::Evaluation(e)
        }
    }
}
