use std::path::PathBuf;

use drq_core::analysis::{count_3cycles, versus, DominanceMatrix, Relation};
use drq_core::battle::{outcome, BattleConfig, Outcome};
use drq_core::mars::MarsConfig;
use drq_core::redcode::{AsmOptions, Warrior};
use rayon::prelude::*;

use crate::config::{BattleArgs, FileConfig, MarsArgs};
use crate::failure::Failure;
use crate::load;
use crate::table::{num, Table};

#[derive(clap::Args)]
pub struct EvalArgs {
    /// Program to evaluate; repeat for several.
    #[arg(long, required = true)]
    warrior: Vec<PathBuf>,
    /// Directory of opponent `.red` files.
    #[arg(long)]
    corpus: PathBuf,
    /// Also write one row per (program, opponent) here.
    #[arg(long)]
    matchups: Option<PathBuf>,
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::AWins => "win",
        Outcome::BWins => "loss",
        Outcome::Tie => "tie",
    }
}

pub fn run_eval(args: EvalArgs, file: &FileConfig) -> Result<(), Failure> {
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let settings = args.battle.resolve(&file.battle)?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize);
    let (index, corpus) = load::corpus(&args.corpus, &asm)?;
    let names = index.names();
    let bc = BattleConfig::new(mars, settings.seeds, settings.rng);

    let mut summary = Table::new(&["warrior", "corpus_size", "wins", "ties", "losses", "generality"]);
    let mut detail = Table::new(&["warrior", "opponent", "fitness", "opponent_fitness", "outcome"]);
    for path in &args.warrior {
        let w = load::warrior(path, &asm)?;
        let results = versus(&w, &corpus, &bc, settings.tie_epsilon)?;
        let count = |o: Outcome| results.iter().filter(|m| m.outcome == o).count();
        let (wins, ties, losses) = (count(Outcome::AWins), count(Outcome::Tie), count(Outcome::BWins));
        summary.push(vec![
            w.name.clone(),
            corpus.len().to_string(),
            wins.to_string(),
            ties.to_string(),
            losses.to_string(),
            num((wins + ties) as f64 / corpus.len() as f64),
        ]);
        for (m, opp) in results.iter().zip(&names) {
            detail.push(vec![
                w.name.clone(),
                opp.to_string(),
                num(m.fitness),
                num(m.opponent_fitness),
                outcome_name(m.outcome).into(),
            ]);
        }
    }
    if let Some(path) = &args.matchups {
        detail.emit(Some(path))?;
    }
    summary.emit(args.output.as_deref())
}

#[derive(clap::Args)]
pub struct MatrixArgs {
    /// Directory of `.red` files.
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Every ordered pair is battled on its own, so agreement between (i, j)
/// and (j, i) is an actual check rather than a construction.
pub fn ordered_relations(warriors: &[Warrior], bc: &BattleConfig, eps: f64) -> Result<Vec<Vec<Relation>>, Failure> {
    let n = warriors.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let results: Vec<_> = pairs.par_iter().map(|&(i, j)| outcome(&warriors[i], &warriors[j], bc, eps)).collect();
    let mut rows = vec![vec![Relation::SelfPair; n]; n];
    for (&(i, j), r) in pairs.iter().zip(results) {
        rows[i][j] = match r? {
            Outcome::AWins => Relation::Win,
            Outcome::BWins => Relation::Loss,
            Outcome::Tie => Relation::Tie,
        };
    }
    Ok(rows)
}

pub fn run_matrix(args: MatrixArgs, file: &FileConfig) -> Result<(), Failure> {
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let settings = args.battle.resolve(&file.battle)?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize);
    let (index, warriors) = load::corpus(&args.dir, &asm)?;
    let names = index.names();
    let bc = BattleConfig::new(mars, settings.seeds, settings.rng);
    let rows = ordered_relations(&warriors, &bc, settings.tie_epsilon)?;

    let mut header = vec![String::new()];
    header.extend(names.iter().map(|s| s.to_string()));
    let mut table = Table::new(&header);
    for (name, row) in names.iter().zip(&rows) {
        let mut line = vec![name.to_string()];
        line.extend(row.iter().map(|r| r.symbol().to_string()));
        table.push(line);
    }
    match DominanceMatrix::from_entries(rows) {
        Ok(m) => eprintln!("{} programs, anti-symmetric: yes, 3-cycles: {}", m.len(), count_3cycles(&m)),
        Err(e) => eprintln!("{} programs, anti-symmetric: no ({e})", names.len()),
    }
    table.emit(args.output.as_deref())
}
