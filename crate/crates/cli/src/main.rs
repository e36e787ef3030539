use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbd::{run, Command, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY_FAILED};

#[derive(Parser)]
#[command(name = "mbd", version, about = "Exact Maxwell-Bloch solutions by Darboux dressing, with residual verification")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; companion outputs share its stem.
    #[arg(long)]
    out: PathBuf,
    /// Finite-difference step, overriding `verify.h`.
    #[arg(long)]
    h: Option<f64>,
    /// Finite-difference order (2 or 4), overriding `verify.order`.
    #[arg(long)]
    order: Option<u8>,
}

#[derive(Subcommand)]
enum Sub {
    /// Write the field table of the configured chain as CSV.
    Generate(Common),
    /// Run residual and conservation checks and write a key=value report.
    Verify(Common),
    /// Compare a closed form with the engine and write the errata ledger.
    Reconcile(Common),
    /// Evaluate a symmetry superposition and its convergence table.
    Perturb(Common),
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MBD_THREADS") else { return Ok(()) };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("MBD_THREADS: expected a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| format!("MBD_THREADS: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let (command, args) = match cli.command {
        Sub::Generate(a) => (Command::Generate, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Reconcile(a) => (Command::Reconcile, a),
        Sub::Perturb(a) => (Command::Perturb, a),
    };
    match run(command, &args.config, &args.out, args.h, args.order) {
        Ok(outcome) => {
            for p in &outcome.written {
                eprintln!("wrote {}", p.display());
            }
            if outcome.passed {
                ExitCode::from(EXIT_OK as u8)
            } else {
                eprintln!("verification failed");
                ExitCode::from(EXIT_VERIFY_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
