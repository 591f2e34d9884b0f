//! `sparse-pce`: batch front end for training, validating and analysing
//! sparse polynomial chaos surrogates.

mod commands;
mod config;
mod error;
mod manifest;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::{CliError, CliResult};
use manifest::{sha256_hex, timestamp, OutputRecord, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "sparse-pce", version, about = "Sparse polynomial chaos surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Train a surrogate; writes model.json and diagnostics.json.
    Train,
    /// Repeated train/assess study; writes replication.csv.
    Replicate,
    /// Outer leave-one-out validation of the training pipeline; writes ocv.json.
    Ocv,
    /// Sobol indices of a saved model; writes sobol.csv.
    Sobol,
    /// Reduce a scenario CSV to box-frame inputs; writes reduced.csv and input_space.json.
    Preprocess,
    /// Sample or evaluate a benchmark; writes design.csv or evaluated.csv.
    BenchmarkEval,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Replicate => "replicate",
            Command::Ocv => "ocv",
            Command::Sobol => "sobol",
            Command::Preprocess => "preprocess",
            Command::BenchmarkEval => "benchmark-eval",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let started_at = timestamp();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))?;
    }
    let config_path = cli.config.ok_or_else(|| CliError::config("--config is required"))?;
    let cfg = RunConfig::load(&config_path, &Overrides { seed: cli.seed, out: cli.out })?;
    let dir = cfg.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::config(format!("cannot create output directory {}: {e}", dir.display())))?;

    let mut outputs = match cli.command {
        Command::Train => commands::train_cmd(&cfg, &dir)?,
        Command::Replicate => commands::replicate_cmd(&cfg, &dir)?,
        Command::Ocv => commands::ocv_cmd(&cfg, &dir)?,
        Command::Sobol => commands::sobol_cmd(&cfg, &dir)?,
        Command::Preprocess => commands::preprocess_cmd(&cfg, &dir)?,
        Command::BenchmarkEval => commands::benchmark_eval_cmd(&cfg, &dir)?,
    };

    let canonical = cfg.canonical_json();
    tables::write_file(&dir.join("config.json"), format!("{canonical}\n").as_bytes())?;
    outputs.push("config.json".into());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        config_sha256: sha256_hex(canonical.as_bytes()),
        seed: cfg.seed(),
        threads: rayon::current_num_threads(),
        started_at,
        finished_at: timestamp(),
        outputs: outputs.iter().map(|name| OutputRecord::of(&dir, name)).collect::<CliResult<_>>()?,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::data(e.to_string()))?;
    tables::write_file(&dir.join("manifest.json"), format!("{text}\n").as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::config(first).to_json_line());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
