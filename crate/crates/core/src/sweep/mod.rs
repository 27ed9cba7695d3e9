//! Config-driven parameter sweeps that write CSV tables.
//!
//! A sweep is a base parameter set (`n_branches`, `gammaK`, `decayK`,
//! `rabiK`, `delta`, `input_branch`, ...) plus up to two axes and optional
//! `constraint.<param> = expr` bindings. [`execute`] runs one subcommand and
//! returns the table together with a short human-readable summary.

mod commands;
mod config;
mod expr;
mod grid;

use std::fmt;
use std::io;
use std::str::FromStr;

pub use commands::{execute, Report, ORACLE_MISMATCH_TOLERANCE};
pub use config::{Entry, KeyValues, Origin};
pub use expr::Expr;
pub use grid::{Axis, BaseParams, Constraint, Param, SweepGrid};

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_ORACLE_MISMATCH: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("{origin}: {}{message}", key.as_ref().map(|k| format!("`{k}`: ")).unwrap_or_default())]
    Config {
        origin: Origin,
        key: Option<String>,
        message: String,
    },
    #[error("unresolvable constraint `{expression}`: {reason}")]
    UnresolvableConstraint { expression: String, reason: String },
    #[error("at {point}: {source}")]
    AtPoint {
        point: String,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Physics(#[from] Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SweepError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config { .. } | SweepError::UnresolvableConstraint { .. } => EXIT_USAGE,
            SweepError::AtPoint { source, .. } | SweepError::Physics(source) => match source {
                Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
                _ => EXIT_USAGE,
            },
            SweepError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Grid2d,
    WState,
    Oracle,
    Design,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Spectrum,
        Command::Grid2d,
        Command::WState,
        Command::Oracle,
        Command::Design,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Grid2d => "grid2d",
            Command::WState => "wstate",
            Command::Oracle => "oracle",
            Command::Design => "design",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}
