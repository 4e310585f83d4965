use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use demuskin_cli::{exit_code, run, CommandKind, Overrides, RunConfig, SystemKind};

/// Lyndon-Demuškin cohomology, cup-product and lifting checks.
#[derive(Parser)]
#[command(name = "demuskin", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandKind,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated Levi parameters, one per generator.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    levi: Option<Vec<i64>>,
    #[arg(long, value_enum)]
    system: Option<SystemKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    target_precision: Option<u32>,
    /// Comma-separated primes; runs one instance per prime.
    #[arg(long, value_delimiter = ',')]
    sweep_p: Option<Vec<u64>>,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the human summary.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = cli.flags;
    let mut cfg = match &f.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        p: f.p,
        s: f.s,
        n: f.n,
        levi: f.levi,
        system: f.system,
        seed: f.seed,
        trials: f.trials,
        target_precision: f.target_precision,
        sweep_p: f.sweep_p,
    });
    let report = match run(cli.command, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(path) = &f.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if !f.quiet {
        print!("{}", report.summary());
    }
    ExitCode::from(exit_code(&report) as u8)
}
