use std::path::{Path, PathBuf};

use drift_ode_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(path, *line, msg))]
    Config {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}\nrerun with --force to write the limit anyway")]
    Verdict(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

fn config_message(path: &Path, line: Option<usize>, msg: &str) -> String {
    match line {
        Some(l) => format!("{}:{l}: {msg}", path.display()),
        None => format!("{}: {msg}", path.display()),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) => core_exit_code(e),
            CliError::Verdict(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    /// What went wrong and, for regime errors, why.
    pub fn explain(&self) -> String {
        let mut s = self.to_string();
        if let CliError::Core(CoreError::NonContracting { .. }) = self {
            s.push_str(
                "\nthe solution only has a large-time structure when a(T) = lambda * integral of rho over one period is negative",
            );
        }
        s
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::ConditionsNotVerified(_) => 4,
        CoreError::NonFiniteSample { .. } | CoreError::SubdivisionLimit { .. } => 3,
        CoreError::Mode { source, .. } => core_exit_code(source),
        e if e.is_math_domain() => 3,
        _ => 2,
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
