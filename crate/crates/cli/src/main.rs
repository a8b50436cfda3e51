use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use trotterlab::{run, Command, Format, RunManifest};

/// Convergence-rate experiments for exponential product formulas.
#[derive(Debug, Parser)]
#[command(name = "trotterlab", version)]
struct Cli {
    /// Experiment to run, or `all`.
    #[arg(value_enum)]
    command: Command,
    /// Strict JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; never changes output bytes.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let manifest = RunManifest {
        command: cli.command,
        config_path: cli.config,
        out_dir: cli.out,
        format: cli.format,
        threads: usize::from(cli.threads),
        seed: cli.seed,
    };
    match run(&manifest) {
        Ok(outcome) => {
            for r in &outcome.summary.reports {
                println!("{}: {}", r.experiment, r.verdict.label());
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                for line in outcome.failures() {
                    eprintln!("failed {line}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
