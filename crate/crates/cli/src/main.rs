mod bench;
mod config;
mod data;
mod geometry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::Usage;

/// Unbiased augmentation of surface signals (LB-eigDA and C-pDA).
///
/// Meshes are given as `.off`/`.ply` paths or synthetic specs
/// (`tetrahedron`, `icosphere:<level>`, `uv-sphere:<res>`).
#[derive(Debug, Parser)]
#[command(name = "surfaug", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// TOML file of `key = value` pairs for the subcommand; its values
    /// replace the corresponding flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble the cotangent operator; export stiffness, areas and a summary.
    Laplacian(geometry::LaplacianArgs),
    /// Compute and save the lowest Laplace-Beltrami eigenpairs.
    Eigens(geometry::EigensArgs),
    /// Design a Chebyshev filter bank and save it as JSON.
    Bank(geometry::BankArgs),
    /// Simulate two groups of noisy signals with a patch effect.
    Simulate(data::SimulateArgs),
    /// Augment a signal set class by class.
    Augment(data::AugmentArgs),
    /// Compare real and augmented sets: sorted means, correlations, deviations.
    Stats(data::StatsArgs),
    /// Time C-pDA against polynomial order and LB-eigDA against mode count.
    Bench(bench::BenchArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Usage::new("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let table = match &cli.config {
        Some(path) => config::read_table(path)?,
        None => toml::Table::new(),
    };
    match cli.command {
        Command::Laplacian(a) => geometry::laplacian(config::merge(a, &table)?),
        Command::Eigens(a) => geometry::eigens(config::merge(a, &table)?),
        Command::Bank(a) => geometry::bank(config::merge(a, &table)?),
        Command::Simulate(a) => data::simulate(config::merge(a, &table)?),
        Command::Augment(a) => data::augment(config::merge(a, &table)?),
        Command::Stats(a) => data::stats(config::merge(a, &table)?),
        Command::Bench(a) => bench::bench(config::merge(a, &table)?),
    }
}

/// 2 for bad input (arguments, files, formats), 1 for failed computations.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<surfaug::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if cause.is::<Usage>() || cause.is::<std::io::Error>() || cause.is::<toml::de::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // library errors already embed their source in the message
            let mut message = String::new();
            for cause in err.chain() {
                let text = cause.to_string();
                if !message.ends_with(&text) {
                    if !message.is_empty() {
                        message.push_str(": ");
                    }
                    message.push_str(&text);
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
