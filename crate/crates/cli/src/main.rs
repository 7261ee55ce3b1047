use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nullcone_cli::{execute, InputError, Overrides, Scenario, EXIT_INPUT};

/// Run a scenario and write its CSV tables, report.json and manifest.json.
#[derive(Parser, Debug)]
#[command(name = "ncone", version)]
struct Args {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Time-grid override.
    #[arg(long = "n-t", value_name = "N")]
    n_t: Option<usize>,
    /// Tolerance override for curvature and persist.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let status = match go(&args) {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<InputError>() {
                Some(ie) => eprintln!("error: {ie}"),
                None => eprintln!("error: {e:#}"),
            }
            EXIT_INPUT
        }
    };
    ExitCode::from(status as u8)
}

fn go(args: &Args) -> anyhow::Result<i32> {
    let mut sc = Scenario::load(&args.config)?;
    let out = match &args.out {
        Some(d) if d.is_relative() => Some(std::env::current_dir()?.join(d)),
        other => other.clone(),
    };
    sc.apply(&Overrides { seed: args.seed, out, n_t: args.n_t, tol: args.tol })?;
    execute(&sc)
}
