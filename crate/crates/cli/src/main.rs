//! `drq`: assemble, battle, evolve and analyze Core War programs.

mod cmd;
mod config;
mod failure;
mod http;
mod load;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::FileConfig;
use failure::Failure;

#[derive(Parser)]
#[command(name = "drq", version, about = "Core War self-play: assembler, MARS, MAP-Elites rounds and analysis")]
struct Cli {
    /// TOML configuration file. Flags override environment, which overrides the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for battles (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a program and print its canonical form.
    Parse(cmd::parse::Args),
    /// Battle programs over several seeded placements.
    Battle(cmd::battle::Args),
    /// Run (or resume) a self-play lineage.
    Drq(cmd::drq::Args),
    /// Best of N fresh samples against a fixed set of opponents.
    Baseline(cmd::baseline::Args),
    /// Generality of programs against a corpus.
    Eval(cmd::eval::EvalArgs),
    /// Pairwise dominance matrix of a corpus.
    Matrix(cmd::eval::MatrixArgs),
    /// Aggregate tables over lineages: generality, variance, trends, cycles, PCA, probe.
    Analyze(cmd::analyze::Args),
    /// Fitness grid of one or more archive snapshots.
    RenderArchive(cmd::archive::Args),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(file.jobs);
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::input("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::other(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Parse(a) => cmd::parse::run(a, &file),
        Command::Battle(a) => cmd::battle::run(a, &file),
        Command::Drq(a) => cmd::drq::run(a, &file),
        Command::Baseline(a) => cmd::baseline::run(a, &file),
        Command::Eval(a) => cmd::eval::run_eval(a, &file),
        Command::Matrix(a) => cmd::eval::run_matrix(a, &file),
        Command::Analyze(a) => cmd::analyze::run(a, &file),
        Command::RenderArchive(a) => cmd::archive::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::Kind::Input as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("drq: {f}");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
