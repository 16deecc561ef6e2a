//! `normcrit` command-line front end.

mod artifacts;
mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::{Failure, RunContext};
use config::RunConfig;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "normcrit", version, about = "Normalized solutions of -Δu = λu + f(u) with prescribed mass")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Continuation run from the first eigenvector at the configured mass.
    Solve,
    /// Smallest eigenvalues of the configured mode.
    Eigs,
    /// Mass thresholds, from explicit inputs or from the configured problem.
    Thresholds,
    /// Deflated search for several solution pairs.
    Multiplicity,
    /// Re-check `records.json` in the output directory against the configuration.
    Verify,
    /// One solve per mass on the configured grid.
    ScanMu,
}

/// Settings of the invocation, written next to the results.
#[derive(Serialize)]
struct RunManifest {
    command: Command,
    seed: u64,
    jobs: usize,
    fp_strict: bool,
    version: &'static str,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli.config.ok_or_else(|| Failure::Config(anyhow::anyhow!("--config is required")))?;
    let cfg = RunConfig::load(&path).map_err(Failure::Config)?;
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let jobs = cli.jobs.max(1);
    commands::prepare_out(&out)?;
    // Results never depend on the thread count, so a second initialization is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    // Arithmetic is never contracted into fused multiply-adds, so strict mode only gets recorded.
    let fp_strict = std::env::var("NORMCRIT_FP_STRICT").is_ok_and(|v| v == "1");
    let manifest = RunManifest { command: cli.command, seed, jobs, fp_strict, version: env!("CARGO_PKG_VERSION") };
    artifacts::write_json(&out, "run.json", &manifest).map_err(Failure::Run)?;

    let ctx = RunContext { cfg, out, seed, jobs };
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Eigs => commands::eigs(&ctx),
        Command::Thresholds => commands::thresholds(&ctx),
        Command::Multiplicity => commands::multiplicity_cmd(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::ScanMu => commands::scan(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("normcrit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
