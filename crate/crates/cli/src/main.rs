//! `tvpfx` — fundamentals-based exchange-rate forecasting pipeline.
//!
//! A declarative TOML file configures the run; subcommands execute the
//! stages (ingest → fundamentals → forecast → evaluate → report), each
//! consuming the previous stage's artifacts from the output directory.
//! Given the same config, seed, and data, every artifact is
//! byte-identical across re-runs.

mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use config::RunConfig;
use pipeline::{run_stage, Ctx, Stage};
use std::path::PathBuf;
use std::process::ExitCode;
use tvpfx_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "tvpfx",
    version,
    about = "Out-of-sample exchange-rate forecasting from macro fundamentals"
)]
struct Cli {
    /// Run-configuration file (TOML).
    #[arg(long, short = 'c', env = "TVPFX_CONFIG", global = true)]
    config: Option<PathBuf>,

    /// Master seed override; every chain seed derives from it.
    #[arg(long, env = "TVPFX_SEED", global = true)]
    seed: Option<u64>,

    /// Worker threads for independent forecast cells (0 = one per core).
    #[arg(long, env = "TVPFX_JOBS", global = true, default_value_t = 0)]
    jobs: usize,

    /// Output directory override.
    #[arg(long, env = "TVPFX_OUT", global = true)]
    out: Option<PathBuf>,

    /// Also write retained sampler draws and convergence diagnostics
    /// for each cell's final forecast origin.
    #[arg(long, env = "TVPFX_DUMP_DRAWS", global = true)]
    dump_draws: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load the raw variable CSVs, apply transforms, write the aligned panel.
    Ingest,
    /// Write full-sample fundamental series for every configured model.
    Fundamentals,
    /// Run every window × model × horizon forecasting cell.
    Forecast,
    /// Score forecasts against the no-change benchmark.
    Evaluate,
    /// Render the per-window summary report.
    Report,
    /// Run all stages in order.
    All,
}

impl Command {
    fn stages(&self) -> &'static [Stage] {
        match self {
            Command::Ingest => &[Stage::Ingest],
            Command::Fundamentals => &[Stage::Fundamentals],
            Command::Forecast => &[Stage::Forecast],
            Command::Evaluate => &[Stage::Evaluate],
            Command::Report => &[Stage::Report],
            Command::All => &Stage::ALL,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((stage, e)) => {
            eprintln!("tvpfx: {stage}: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), (String, Error)> {
    let in_config = |e| ("config".to_string(), e);
    let path = cli.config.ok_or_else(|| {
        in_config(Error::Config(
            "no configuration file: pass --config <file> or set TVPFX_CONFIG".to_string(),
        ))
    })?;
    let config = RunConfig::load(&path).map_err(in_config)?;
    let ctx = Ctx {
        out: cli.out.unwrap_or_else(|| config.run.out_dir.clone()),
        seed: cli.seed.unwrap_or(config.run.seed),
        jobs: cli.jobs,
        dump_draws: cli.dump_draws,
        config,
    };
    for &stage in cli.command.stages() {
        run_stage(&ctx, stage).map_err(|e| (stage.name().to_string(), e))?;
    }
    Ok(())
}
