use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drift_ode_cli::{run, thread_cap, CliError, Command, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "drift-ode",
    version,
    about = "Large-time structure of y' = lambda rho(t) y + b(t)"
)]
struct Args {
    /// Root directory for every output file.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Drift function, asymptotic solution and windows for a scalar scenario.
    Analyze { config: PathBuf },
    /// Regenerate the section-4 constants and figure data.
    ReproducePaper,
    /// Convergence of y_n(0) for a perturbed-periodic family.
    Converge {
        config: PathBuf,
        /// Write the periodic limit even if the sufficient conditions fail.
        #[arg(long)]
        force: bool,
    },
    /// Modal analysis of a compartment system against full RK4.
    Soil { config: PathBuf },
    /// Parse an expression and print its normalised form and tree.
    ParseCheck {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.explain());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    if let Some(n) = thread_cap(env.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let command = match args.command {
        Cmd::Analyze { config } => Command::Analyze { config },
        Cmd::ReproducePaper => Command::ReproducePaper,
        Cmd::Converge { config, force } => Command::Converge { config, force },
        Cmd::Soil { config } => Command::Soil { config },
        Cmd::ParseCheck { expr } => Command::ParseCheck { expr },
    };
    // a failing verdict still leaves diagnostics on disk; say where
    let outcome = run(&command, &args.out)?;
    for path in &outcome.written {
        println!("wrote {}", path.display());
    }
    if !outcome.message.is_empty() {
        print!("{}", outcome.message);
        if !outcome.message.ends_with('\n') {
            println!();
        }
    }
    Ok(())
}
