use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use dbconv_cli::{execute, load, CliError, ConfigError, RunConfig, Status, Verb};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Single or parallel chains with the relative-difference monitor
    Run,
    /// Efficiency of [sampler] against [sampler.b]
    Compare,
    /// Simulated annealing over the [schedule]
    Anneal,
    /// Quantitative stationarity test, doubling n until it passes
    Test,
}

/// Detailed-balance convergence diagnostics for grid MCMC.
///
/// Exit status: 0 success, 2 configuration error, 3 not converged within
/// the iteration cap, 4 numerical or i/o failure.
#[derive(Debug, Parser)]
#[command(name = "dbconv", version)]
struct Args {
    command: Command,
    /// Configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration, overridden by --config
    #[arg(long)]
    preset: Option<String>,
    /// Overrides [run] seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn configure(args: &Args) -> Result<RunConfig, ConfigError> {
    let text = match &args.config {
        Some(p) => Some((
            std::fs::read_to_string(p).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", p.display())))?,
            p.display().to_string(),
        )),
        None => None,
    };
    if text.is_none() && args.preset.is_none() {
        return Err(ConfigError::new("pass --config and/or --preset"));
    }
    let mut raw = load(text.as_ref().map(|(t, o)| (t.as_str(), o.as_str())), args.preset.as_deref())?;
    if let Some(seed) = args.seed {
        raw.set("run", "seed", seed.to_string(), "--seed");
    }
    RunConfig::from_raw(&raw)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = match configure(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dbconv: {}", CliError::Config(e));
            return ExitCode::from(2);
        }
    };
    let verb = match args.command {
        Command::Run => Verb::Run,
        Command::Compare => Verb::Compare,
        Command::Anneal => Verb::Anneal,
        Command::Test => Verb::Test,
    };
    match execute(verb, &config, &args.out) {
        Ok(Status::Converged) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("dbconv: not converged within the iteration cap; outputs in {}", args.out.display());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("dbconv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
