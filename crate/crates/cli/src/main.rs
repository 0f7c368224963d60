use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use peakonlab_cli::commands::{self, SnapshotSelector, EXIT_USAGE};
use peakonlab_cli::{CliError, Scenario};

/// Solver, unique-continuation probe and peakon tools for
/// Camassa–Holm-type equations.
#[derive(Debug, Parser)]
#[command(name = "peakonlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the PDE solver and export snapshots, diagnostics and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe vanishing intervals of exported snapshots.
    Probe {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding `snapshots.csv` (defaults to the scenario output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Snapshot index, a time (nearest snapshot), or "all".
        #[arg(long, default_value = "all")]
        snapshot: SnapshotSelector,
    },
    /// Randomized check of the kernel monotonicity inequalities.
    Kernelcheck {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Evolve the N-peakon ODE, optionally against the PDE.
    Peakon {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative L² and sup differences of two snapshot files.
    Compare { first: PathBuf, second: PathBuf },
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { config, out } => {
            let s = Scenario::load(&config)?;
            commands::simulate(&s, &commands::output_dir(&s, out.as_deref()))
        }
        Command::Probe {
            config,
            out,
            snapshot,
        } => {
            let s = Scenario::load(&config)?;
            commands::probe(&s, &commands::output_dir(&s, out.as_deref()), snapshot)
        }
        Command::Kernelcheck { trials, seed } => commands::kernelcheck(trials, seed),
        Command::Peakon { config, out } => {
            let s = Scenario::load(&config)?;
            commands::peakon(&s, &commands::output_dir(&s, out.as_deref()))
        }
        Command::Compare { first, second } => {
            let (rel, sup) = commands::compare(&first, &second)?;
            println!("relative_l2 {rel:.16e}\nsup_diff {sup:.16e}");
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
