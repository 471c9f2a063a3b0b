use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gamma_sparse::Error;
use gamma_sparse_verify::{run, RunConfig};

/// Run the verification suites described by a TOML config.
#[derive(Parser)]
#[command(name = "verify", version)]
struct Cli {
    config: PathBuf,
    /// Run only these suites (repeatable); overrides the config list.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if !cli.suites.is_empty() {
        cfg.suites = cli.suites;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cfg.out.clone();
    match run(&cfg, &out) {
        Ok(outcome) => {
            for r in &outcome.reports {
                let status = if r.passed { "ok" } else { "FAILED" };
                println!("{:<14} {status}", r.suite);
                for f in r.failures() {
                    println!("    failed: {f}");
                }
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
