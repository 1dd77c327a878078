use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cloak_cli::config::{load, SpecfunConfig};
use cloak_cli::{run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "cloak", version, about = "Convergence studies for the regularized spherical cloak")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ρ-sweep of the normal-field pairing against its predicted limit.
    Converge(Common),
    /// Field samples of a solved scenario.
    Fields(Common),
    /// Plane-wave half-space sweep.
    Halfspace(Common),
    /// Special-function identity grid.
    CheckSpecfun(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides the main tolerance of the command.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

fn required(path: &Option<PathBuf>) -> Result<&Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Config("--config is required for this command".into()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, config) = match cli.command {
        Command::Converge(c) => {
            let cfg = RunConfig::Converge(load(required(&c.config)?)?);
            (c, cfg)
        }
        Command::Fields(c) => {
            let cfg = RunConfig::Fields(load(required(&c.config)?)?);
            (c, cfg)
        }
        Command::Halfspace(c) => {
            let cfg = RunConfig::Halfspace(load(required(&c.config)?)?);
            (c, cfg)
        }
        Command::CheckSpecfun(c) => {
            let cfg: SpecfunConfig = match &c.config {
                Some(p) => load(p)?,
                None => SpecfunConfig::default(),
            };
            (c, RunConfig::CheckSpecfun(cfg))
        }
    };
    let mut config = config;
    if let Some(tol) = common.tol {
        config.override_tol(tol);
    }
    if let Some(n) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let outcome = run(&config, &common.out)?;
    for f in &outcome.outputs {
        println!("{}", common.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
