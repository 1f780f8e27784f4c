use std::path::PathBuf;

use drq_core::drq::{run as run_lineage, DrqConfig, History, Lineage, RoundRecord, RunStore};
use drq_core::mars::MarsConfig;

use super::mutator::{self, LlmArgs, MutatorKind};
use crate::config::{BattleArgs, FileConfig, MarsArgs};
use crate::failure::Failure;
use crate::load;
use crate::table::{opt_num, Table};

#[derive(clap::Args)]
pub struct Args {
    /// Initial program w0.
    #[arg(long)]
    init: PathBuf,
    /// Run directory; an existing run with the same settings is resumed.
    #[arg(long)]
    out: PathBuf,
    /// Number of rounds T.
    #[arg(long)]
    rounds: Option<u32>,
    /// History length: a positive count or `all`.
    #[arg(long)]
    k: Option<String>,
    /// MAP-Elites iterations per round.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long, value_enum, default_value = "random")]
    mutator: MutatorKind,
    /// Seed each round's archive with all earlier champions.
    #[arg(long)]
    init_with_champions: bool,
    /// Bins per behavior axis.
    #[arg(long)]
    bins: Option<u32>,
    /// Candidates proposed per archive state.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Top elites re-scored on fresh seeds when picking a champion.
    #[arg(long)]
    selection_candidates: Option<usize>,
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
    #[command(flatten)]
    llm: LlmArgs,
    /// Write the round table here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn config(args: &Args, file: &FileConfig) -> Result<DrqConfig, Failure> {
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let battle = args.battle.resolve(&file.battle)?;
    let d = &file.drq;
    let history = match args.k.as_deref().or(d.k.as_deref()) {
        Some(k) => k.parse::<History>().map_err(Failure::input)?,
        None => History::All,
    };
    let rounds = args.rounds.or(d.rounds).unwrap_or(1);
    if rounds == 0 {
        return Err(Failure::input("--rounds must be at least 1"));
    }
    let bins = args.bins.or(d.bins).unwrap_or(drq_core::archive::DEFAULT_BINS);
    if bins == 0 {
        return Err(Failure::input("--bins must be at least 1"));
    }
    Ok(DrqConfig {
        rounds,
        history,
        iterations_per_round: args.iters.or(d.iters).unwrap_or(1000),
        init_with_champions: args.init_with_champions || d.init_with_champions.unwrap_or(false),
        grid_bins: bins,
        mars,
        seeds_per_battle: battle.seeds,
        batch_size: args.batch_size.or(d.batch_size).unwrap_or(16).max(1),
        selection_candidates: args.selection_candidates.or(d.selection_candidates).unwrap_or(8).max(1),
        rng_seed: battle.rng,
    })
}

pub fn round_table(lineage: &Lineage) -> Table {
    let mut t = Table::new(&[
        "round",
        "name",
        "digest",
        "environment",
        "fitness",
        "archive_fitness",
        "occupancy",
        "evaluations",
        "invalid",
    ]);
    for r in &lineage.rounds {
        t.push(round_row(r));
    }
    t
}

fn round_row(r: &RoundRecord) -> Vec<String> {
    let env: Vec<String> = r.environment.iter().map(u32::to_string).collect();
    vec![
        r.round.to_string(),
        r.name.clone(),
        r.digest.clone(),
        env.join(" "),
        opt_num(r.fitness),
        opt_num(r.archive_fitness),
        r.occupancy.to_string(),
        r.evaluations.to_string(),
        r.invalid.to_string(),
    ]
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), Failure> {
    let cfg = config(&args, file)?;
    let w0 = load::warrior(&args.init, &cfg.asm_options())?;
    let mutator = mutator::build(args.mutator, &args.llm, file, &cfg.asm_options())?;
    let store = RunStore::new(&args.out);
    if store.exists() {
        eprintln!("resuming {}", args.out.display());
    }
    let lineage = run_lineage(&w0, &cfg, mutator.as_ref(), Some(&store), |r| {
        eprintln!(
            "round {}: {} fitness {} occupancy {} invalid {}",
            r.round,
            r.name,
            opt_num(r.fitness),
            r.occupancy,
            r.invalid
        );
    })?;
    round_table(&lineage).emit(args.output.as_deref())
}
