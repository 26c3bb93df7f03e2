use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use webrank_cli::report::Command;
use webrank_cli::{execute, Overrides};

/// Invariants, rank and linearizability of planar webs.
#[derive(Debug, Parser)]
#[command(name = "webrank", version)]
struct Cli {
    /// One of: analyze, curvature, invariants, rank, abel, geodesic,
    /// linearizable, verify-relation.
    command: String,
    /// Web specification file (TOML).
    specfile: PathBuf,
    /// Sampling seed; overrides the file and WEBRANK_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample points.
    #[arg(long)]
    samples: Option<usize>,
    /// Zero-test tolerance relative to the rounding scale.
    #[arg(long)]
    tol: Option<f64>,
    /// Analyze the functions in this 1-based order, e.g. 2,1,3,4.
    #[arg(long)]
    order: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(command) = Command::from_name(&cli.command) else {
        eprintln!("webrank: unknown command `{}`", cli.command);
        return ExitCode::from(1);
    };
    let over = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        tolerance: cli.tol,
        order: cli.order,
    };
    let report = match execute(command, &cli.specfile, &over) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("webrank: {e}");
            return ExitCode::from(1);
        }
    };
    let json = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("webrank: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{json}"),
    }
    for e in &report.errors {
        eprintln!("webrank: {e}");
    }
    ExitCode::from(report.status.exit_code() as u8)
}
