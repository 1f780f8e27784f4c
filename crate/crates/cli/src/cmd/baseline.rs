use std::path::PathBuf;

use drq_core::battle::BattleConfig;
use drq_core::drq::best_of_n;
use drq_core::mars::MarsConfig;
use drq_core::redcode::{emit, AsmOptions, Warrior};

use super::mutator::{self, LlmArgs, MutatorKind};
use crate::config::{BattleArgs, FileConfig, MarsArgs};
use crate::failure::{write_err, Failure};
use crate::load;
use crate::table::{num, opt_num, Table};

#[derive(clap::Args)]
pub struct Args {
    /// Opponent programs.
    #[arg(required = true)]
    opponents: Vec<PathBuf>,
    /// Number of fresh samples; 1 is the zero-shot baseline.
    #[arg(long, short, default_value_t = 8)]
    n: usize,
    #[arg(long, value_enum, default_value = "random")]
    mutator: MutatorKind,
    /// Write the best sample here.
    #[arg(long)]
    best: Option<PathBuf>,
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
    #[command(flatten)]
    llm: LlmArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::input("-n must be at least 1"));
    }
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let settings = args.battle.resolve(&file.battle)?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize);
    let opponents: Vec<Warrior> = args.opponents.iter().map(|p| load::warrior(p, &asm)).collect::<Result<_, _>>()?;
    let mutator = mutator::build(args.mutator, &args.llm, file, &asm)?;
    let bc = BattleConfig::new(mars, settings.seeds, settings.rng);
    let result = best_of_n(args.n, mutator.as_ref(), &opponents, &bc, settings.rng)?;

    let mut table = Table::new(&["sample", "fitness"]);
    for (i, f) in result.fitness.iter().enumerate() {
        table.push(vec![i.to_string(), opt_num(*f)]);
    }
    match &result.best {
        Some((w, f)) => {
            eprintln!("best: {} fitness {}", w.name, num(*f));
            if let Some(path) = &args.best {
                std::fs::write(path, emit(w) + "\n").map_err(write_err(path))?;
            }
        }
        None => eprintln!("no sample assembled"),
    }
    table.emit(args.output.as_deref())
}
