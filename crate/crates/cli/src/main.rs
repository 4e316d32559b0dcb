//! `dtc`: command-line driver for the kicked Ising simulator.
//!
//! Every subcommand reads an optional JSON config, applies `--set key=value`
//! overrides and writes CSV/JSON files into `--out`. Each file records the
//! SHA-256 of the canonical config so outputs can be matched to inputs.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Command, ExperimentConfig, SCHEMA_VERSION};
use error::CliError;
use output::OutputDir;

#[derive(Parser)]
#[command(
    name = "dtc",
    version,
    about = "Kicked Ising chain and time-crystal diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Stroboscopic m^x trajectory and its spectrum.
    Run(Common),
    /// Spectra and KL divergence over a parameter grid.
    Scan(Common),
    /// Quasi-energies and π-pairing gap scaling.
    Floquet(Common),
    /// Infinite-range model: exact trajectory against the closed form.
    Lmg(Common),
    /// Power-law fit of the main-peak splitting over sizes and kick errors.
    Fit(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file; missing keys take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory, created if needed.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// `key=value` override with a dotted key, e.g. `scan.max=0.3`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved config and exit without running.
    #[arg(long)]
    print_config: bool,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Run(c) => (Command::Run, c),
            Sub::Scan(c) => (Command::Scan, c),
            Sub::Floquet(c) => (Command::Floquet, c),
            Sub::Lmg(c) => (Command::Lmg, c),
            Sub::Fit(c) => (Command::Fit, c),
        }
    }
}

fn resolve(command: Command, args: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref(), &args.set)?;
    // The subcommand wins over any `command` key in the file.
    cfg.command = command;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig, out_dir: &std::path::Path) -> Result<(), CliError> {
    if let Some(n) = cfg.threads {
        // Fails only if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let hash = cfg.hash();
    let mut out = OutputDir::create(out_dir, &hash)?;
    log::info!(
        "{:?} -> {} (config {})",
        cfg.command,
        out_dir.display(),
        &hash[..12]
    );
    let summary = commands::execute(cfg, &mut out)?;
    let mut files = out.written().to_vec();
    files.push("meta.json".into());
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    if let Some(map) = config.as_object_mut() {
        map.remove("threads");
    }
    let meta = json!({
        "command": cfg.command,
        "config": config,
        "versions": {
            "dtc": env!("CARGO_PKG_VERSION"),
            "schema_version": SCHEMA_VERSION,
        },
        "files": files,
        "summary": summary,
    });
    out.json("meta.json", meta)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (command, args) = Cli::parse().command.split();
    let result = resolve(command, &args).and_then(|cfg| {
        if args.print_config {
            print!("{}", cfg.canonical());
            Ok(())
        } else {
            execute(&cfg, &args.out)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
