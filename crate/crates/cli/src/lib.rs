//! Command-line front end for the evaporation solver: configuration
//! parsing, subcommands and output files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{cmd_audit, cmd_converge, cmd_run, cmd_verify, ConvergenceTable};
pub use config::{load_config, parse_config, Parsed, RunManifest};
pub use error::{CliError, Result};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A property, audit or convergence check failed.
    pub const CHECK_FAILED: i32 = 1;
    /// Bad configuration or usage.
    pub const USAGE: i32 = 2;
    /// The solver failed.
    pub const SOLVER: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(evapsbp::Error::InvalidParameter { .. }) => exit::USAGE,
            CliError::Solver(_) => exit::SOLVER,
            CliError::Io { .. } | CliError::Csv { .. } | CliError::Malformed { .. } | CliError::Json(_) => {
                exit::SOLVER
            }
            _ => exit::USAGE,
        }
    }
}
