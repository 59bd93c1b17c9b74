use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use eddydg::config::{ConfigError, Mode, RunConfig};
use eddydg::run::{run, RunError};

/// Hybrid DG eddy current solver.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// solve, verify or convergence
    mode: String,
    /// TOML configuration file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` pairs, e.g. `--degree 2 --sigma.copper 5.8e7`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match go(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn go(cli: &Cli) -> Result<Vec<PathBuf>, RunError> {
    let mode = Mode::parse(&cli.mode).ok_or_else(|| ConfigError::Key { key: "mode".into(), msg: format!("unknown mode '{}'", cli.mode) })?;
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Io(p.clone(), e))?,
        None => String::new(),
    };
    let cfg = RunConfig::parse(&text, &cli.overrides, Some(mode))?;
    run(&cfg)
}
