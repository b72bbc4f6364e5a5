use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use refraction_cli::{run, CliError, CommandName, RunConfig};

/// Optimal refraction thresholds, value curves, reflection limits and Monte Carlo checks.
#[derive(Debug, Parser)]
#[command(name = "refraction", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Command to run (overrides `command.name`).
    #[arg(long, value_enum)]
    command: Option<CommandName>,
    /// Monte Carlo seed (overrides `command.mc.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(c) = args.command {
        cfg.command.name = c;
    }
    if let Some(s) = args.seed {
        cfg.command.mc.seed = s;
    }
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let report = run(&cfg, &out)?;
    println!("{}: {}", report.command.as_str(), report.summary);
    for f in &report.files {
        println!("  wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
