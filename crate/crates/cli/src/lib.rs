//! Batch runner for the neklab pipelines: a TOML config in, CSV and JSON
//! artifacts plus a hashed manifest out.
//!
//! Exit status: 0 success, 1 invalid config, 2 budget exceeded, 3 a
//! checked invariant failed (a `witness.json` is written).

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipelines;

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use config::{ExperimentConfig, Pipeline};
pub use error::{CliError, CliResult};
use manifest::{Artifacts, Manifest};
use pipelines::{Budget, Context};

pub const DEFAULT_OUT: &str = "neklab-out";

#[derive(Debug, Clone, Parser)]
#[command(name = "neklab", version, about = "Nekhoroshev stability experiments")]
pub struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    pub pipeline: Pipeline,
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads of the global pool.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Wall-clock budget in seconds (overrides `budget_secs`).
    #[arg(long)]
    pub budget_secs: Option<f64>,
}

/// Runs one pipeline and returns the process exit status. Messages go
/// to stderr; artifacts and the manifest go to the output directory.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::empty()),
    };
    let cfg = match cfg.and_then(|c| c.validate(cli.pipeline).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: invalid config: --threads must be >= 1");
            return 1;
        }
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            log::warn!("thread pool already initialized; --threads ignored");
        }
    }
    let budget_secs = cli.budget_secs.or(cfg.budget_secs);
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut art = match Artifacts::new(&out) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let budget = Budget::new(budget_secs);
    let ctx = Context {
        cfg: &cfg,
        seed,
        budget: &budget,
    };
    let result = match cli.pipeline {
        Pipeline::Smooth => pipelines::smooth(&ctx, &mut art),
        Pipeline::Steepness => pipelines::steepness(&ctx, &mut art),
        Pipeline::Geography => pipelines::geography(&ctx, &mut art),
        Pipeline::Normalform => pipelines::normalform(&ctx, &mut art),
        Pipeline::Stability => pipelines::stability(&ctx, &mut art),
        Pipeline::Fit => pipelines::fit(&ctx, &mut art),
    };
    let (code, message) = match &result {
        Ok(()) => (0, None),
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invariant { witness, .. } = e {
                if let Err(w) = art.write_json("witness.json", witness) {
                    eprintln!("error: could not write witness: {w}");
                }
            }
            (e.exit_code(), Some(e.to_string()))
        }
    };
    let manifest = Manifest {
        schema: "neklab.manifest/1".into(),
        subcommand: cli.pipeline.name().into(),
        config: json!({
            "file": cli.config,
            "parsed": cfg,
            "flags": {"out": out, "seed": cli.seed, "threads": cli.threads, "budget_secs": cli.budget_secs},
        }),
        versions: json!({
            "neklab": neklab::VERSION,
            "neklab-cli": env!("CARGO_PKG_VERSION"),
            "config_schema": config::SCHEMA_VERSION,
        }),
        seed,
        threads: rayon::current_num_threads(),
        budget_secs,
        wall_time_secs: budget.elapsed(),
        exit_code: code,
        message,
        files: Vec::new(),
    };
    if let Err(e) = art.finish(manifest) {
        eprintln!("error: could not write manifest: {e}");
        return if code == 0 { e.exit_code() } else { code };
    }
    code
}
