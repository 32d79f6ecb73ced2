use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qaoa_mimo::cli::{self, ExperimentConfig, Mode, EXIT_CONFIG, EXIT_RUNTIME};
use qaoa_mimo::Simulator;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    GenInstances,
    TrainInit,
    Detect,
    Compare,
    Selftest,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::GenInstances => Mode::GenInstances,
            ModeArg::TrainInit => Mode::TrainInit,
            ModeArg::Detect => Mode::Detect,
            ModeArg::Compare => Mode::Compare,
            ModeArg::Selftest => Mode::Selftest,
        }
    }
}

/// QAOA maximum-likelihood MIMO detection experiments.
///
/// Exit codes: 0 success, 1 config error, 2 runtime error, 3 some
/// instances failed. QAOA_MIMO_MAX_QUBITS overrides the simulator cap.
#[derive(Debug, Parser)]
#[command(name = "qaoa-mimo", version)]
struct Args {
    mode: ModeArg,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the mode's output path (a directory for `compare`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let sim = match Simulator::from_env() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };

    let result = cli::run(args.mode.into(), &cfg, args.out.as_deref(), &sim);
    match &result {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            if outcome.failures > 0 {
                eprintln!("warning: {} instance run(s) failed", outcome.failures);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    let code = cli::exit_code(&result);
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_RUNTIME as u8))
}
