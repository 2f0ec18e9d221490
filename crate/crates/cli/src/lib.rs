//! Command-line front end: scenario configs in, CSV tables and gnuplot
//! scripts out. The binary is a thin wrapper around [`run`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod ini;
pub mod plot;

use std::path::{Path, PathBuf};

pub use config::Scenario;
pub use error::{CliError, Result};

use csv::OutDir;

pub const THREADS_ENV: &str = "DRIFT_ODE_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Analyze { config: PathBuf },
    ReproducePaper,
    Converge { config: PathBuf, force: bool },
    Soil { config: PathBuf },
    ParseCheck { expr: String },
}

/// What a command produced: files in write order plus a message for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub message: String,
}

fn open(out: &Path, scenario: &Scenario) -> Result<OutDir> {
    OutDir::create(&commands::analyze::destination(out, scenario))
}

pub fn run(command: &Command, out: &Path) -> Result<Outcome> {
    match command {
        Command::Analyze { config } => {
            let s = Scenario::load(config)?;
            let mut dir = open(out, &s)?;
            commands::analyze::run(&s, &mut dir)?;
            Ok(Outcome {
                written: dir.written().to_vec(),
                message: String::new(),
            })
        }
        Command::ReproducePaper => {
            let mut dir = OutDir::create(out)?;
            commands::reference::run(&mut dir)?;
            Ok(Outcome {
                written: dir.written().to_vec(),
                message: String::new(),
            })
        }
        Command::Converge { config, force } => {
            let s = Scenario::load(config)?;
            let mut dir = open(out, &s)?;
            let message = commands::converge::run(&s, *force, &mut dir)?;
            Ok(Outcome {
                written: dir.written().to_vec(),
                message,
            })
        }
        Command::Soil { config } => {
            let s = Scenario::load(config)?;
            let mut dir = open(out, &s)?;
            commands::soil::run(&s, &mut dir)?;
            Ok(Outcome {
                written: dir.written().to_vec(),
                message: String::new(),
            })
        }
        Command::ParseCheck { expr } => Ok(Outcome {
            written: Vec::new(),
            message: commands::parse_check::report(expr)?,
        }),
    }
}

/// Thread cap from `DRIFT_ODE_THREADS`; `None` leaves rayon's default.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}
