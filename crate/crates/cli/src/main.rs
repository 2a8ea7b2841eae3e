use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use entbuffer_cli::commands::{self, FaultArg, SimulateArgs, SweepArgs, SweepParam};
use entbuffer_cli::config::{ConfigFile, Mode};
use entbuffer_cli::Result;

/// Availability and fidelity of a two-node entanglement buffer with pumping.
#[derive(Debug, Parser)]
#[command(name = "entbuffer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form availability, average fidelity, noise threshold and
    /// steady-state head.
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form metrics over a range of one parameter (CSV).
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound band for bilocal Clifford protocols over q (CSV).
    Regimes {
        config: PathBuf,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimates (CSV); a summary goes to stderr.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        t_sim: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (overrides ENTBUFFER_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        /// Level histogram, lifetime KS test and a t_sim vs 2·t_sim check.
        #[arg(long)]
        diagnostics: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the cross-checking oracle suite.
    Verify {
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `<dir>/<stem>_levels.csv` next to the main output.
fn levels_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("simulate");
    out.with_file_name(format!("{stem}_levels.csv"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { config, out } => {
            let cfg = ConfigFile::load(&config)?;
            emit(&commands::analyze(&cfg)?, out.as_deref())
        }
        Command::Sweep { config, param, from, to, steps, out } => {
            let cfg = ConfigFile::load(&config)?;
            let args = SweepArgs { param, from, to, steps };
            emit(&commands::sweep(&cfg, &args)?, out.as_deref())
        }
        Command::Regimes { config, steps, out } => {
            let cfg = ConfigFile::load(&config)?;
            emit(&commands::regimes(&cfg, steps)?, out.as_deref())
        }
        Command::Simulate { config, samples, t_sim, mode, seed, threads, diagnostics, out } => {
            let cfg = ConfigFile::load(&config)?;
            let args = SimulateArgs { samples, t_sim, mode, seed, threads, diagnostics };
            let result = commands::simulate(&cfg, &args)?;
            emit(&result.csv, out.as_deref())?;
            eprint!("{}", result.summary);
            if let Some(levels) = result.levels_csv.filter(|l| !l.is_empty()) {
                match &out {
                    Some(path) => std::fs::write(levels_path(path), levels)?,
                    None => eprint!("{levels}"),
                }
            }
            Ok(())
        }
        Command::Verify { inject_fault } => {
            let report = commands::verify(inject_fault)?;
            emit(&report, None)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entbuffer: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
