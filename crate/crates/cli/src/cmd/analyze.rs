use std::collections::HashMap;
use std::path::PathBuf;

use drq_core::analysis::{
    count_3cycles, cross_run_variance, fit_trend, genotypes, pca2, phenotype_rate_of_change, train_probe, versus,
    DominanceMatrix, Embedder, HashedNgramEmbedder, TrendModel,
};
use drq_core::battle::{BattleConfig, Outcome};
use drq_core::drq::{Lineage, RunStore};
use drq_core::mars::MarsConfig;
use drq_core::redcode::{AsmOptions, Warrior};

use crate::config::{BattleArgs, FileConfig, MarsArgs, ServiceSettings};
use crate::failure::{write_err, Failure};
use crate::http::HttpEmbedder;
use crate::load;
use crate::table::{num, opt_num, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EmbedKind {
    /// Hashed character n-grams, computed locally.
    Offline,
    /// An embeddings endpoint (DRQ_EMBED_*).
    Remote,
}

#[derive(clap::Args)]
pub struct Args {
    /// Run directories written by `drq drq`.
    #[arg(long, required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    /// Directory of reference `.red` files.
    #[arg(long)]
    corpus: PathBuf,
    /// Directory for the output tables.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "offline")]
    embed: EmbedKind,
    #[arg(long)]
    embed_endpoint: Option<String>,
    #[arg(long)]
    embed_model: Option<String>,
    /// Ridge penalty of the genotype-to-generality probe.
    #[arg(long, default_value_t = 1e-3)]
    probe_lambda: f64,
    /// Fraction of champions used to fit the probe.
    #[arg(long, default_value_t = 0.8)]
    probe_train: f64,
    /// Simulator settings; by default those recorded in the runs.
    #[command(flatten)]
    mars: MarsArgs,
    #[command(flatten)]
    battle: BattleArgs,
}

/// A champion's results against the corpus.
#[derive(Clone)]
struct Profile {
    phenotype: Vec<f64>,
    generality: f64,
}

struct Champion<'a> {
    run: usize,
    round: u32,
    warrior: &'a Warrior,
    profile: Profile,
}

fn load_runs(dirs: &[PathBuf]) -> Result<Vec<Lineage>, Failure> {
    dirs.iter()
        .map(|d| {
            let store = RunStore::new(d);
            if !store.exists() {
                return Err(Failure::input(format!("{}: no lineage.index", d.display())));
            }
            Ok(store.load_lineage()?)
        })
        .collect()
}

fn simulator(args: &Args, file: &FileConfig, runs: &[Lineage]) -> Result<MarsConfig, Failure> {
    if args.mars.is_set() || file.mars.preset.is_some() {
        return args.mars.resolve(&file.mars, MarsConfig::PAPER);
    }
    let first = runs[0].config.mars;
    if runs.iter().any(|r| r.config.mars != first) {
        return Err(Failure::input("runs use different simulator settings; pass --preset or explicit limits"));
    }
    Ok(first)
}

fn embedder(args: &Args, file: &FileConfig) -> Result<Box<dyn Embedder>, Failure> {
    match args.embed {
        EmbedKind::Offline => Ok(Box::new(HashedNgramEmbedder::default())),
        EmbedKind::Remote => {
            let s = ServiceSettings::resolve(
                (args.embed_endpoint.as_deref(), args.embed_model.as_deref()),
                "DRQ_EMBED",
                &file.embed,
            );
            Ok(Box::new(HttpEmbedder::new(s.client_spec("embedding")?)))
        }
    }
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), Failure> {
    let runs = load_runs(&args.runs)?;
    let mars = simulator(&args, file, &runs)?;
    let settings = args.battle.resolve(&file.battle)?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize);
    let (_, corpus) = load::corpus(&args.corpus, &asm)?;
    let bc = BattleConfig::new(mars, settings.seeds, settings.rng);
    std::fs::create_dir_all(&args.out).map_err(write_err(&args.out))?;

    // Identical programs share results: seeding depends only on content.
    let mut cache: HashMap<String, Profile> = HashMap::new();
    let mut champions = Vec::new();
    for (r, lineage) in runs.iter().enumerate() {
        for (record, w) in lineage.rounds.iter().zip(&lineage.champions) {
            let profile = match cache.get(&record.digest) {
                Some(p) => p.clone(),
                None => {
                    let results = versus(w, &corpus, &bc, settings.tie_epsilon)?;
                    let ok = results.iter().filter(|m| m.outcome != Outcome::BWins).count();
                    let p = Profile {
                        phenotype: results.iter().map(|m| m.fitness).collect(),
                        generality: ok as f64 / corpus.len() as f64,
                    };
                    cache.insert(record.digest.clone(), p.clone());
                    p
                }
            };
            champions.push(Champion { run: r, round: record.round, warrior: w, profile });
        }
    }

    let per_round = per_round_table(&champions, runs.len());
    per_round.0.save(&args.out, "per_round.csv")?;
    trend_table(&champions, &per_round.1).save(&args.out, "trends.csv")?;
    cycle_table(&runs, &bc, settings.tie_epsilon)?.save(&args.out, "cycles.csv")?;
    champion_table(&champions)?.save(&args.out, "champions.csv")?;
    let embedder = embedder(&args, file)?;
    probe_table(&champions, embedder.as_ref(), args.probe_train, args.probe_lambda)?.save(&args.out, "probe.csv")?;
    eprintln!(
        "{} runs, {} champions, {} corpus programs; tables in {}",
        runs.len(),
        champions.len(),
        corpus.len(),
        args.out.display()
    );
    Ok(())
}

/// Per-round means plus the (round, variance, rate) series used for trends.
fn per_round_table(champions: &[Champion], n_runs: usize) -> (Table, Vec<(u32, Option<f64>, Option<f64>)>) {
    let last = champions.iter().map(|c| c.round).max().unwrap_or(0);
    let find = |run: usize, round: u32| champions.iter().find(|c| c.run == run && c.round == round);
    let mut table = Table::new(&["round", "runs", "mean_generality", "phenotype_variance", "mean_rate_of_change"]);
    let mut series = Vec::new();
    for t in 0..=last {
        let here: Vec<&Champion> = champions.iter().filter(|c| c.round == t).collect();
        if here.is_empty() {
            continue;
        }
        let generality = here.iter().map(|c| c.profile.generality).sum::<f64>() / here.len() as f64;
        let phenotypes: Vec<Vec<f64>> = here.iter().map(|c| c.profile.phenotype.clone()).collect();
        let variance = cross_run_variance(&phenotypes).ok();
        let rates: Vec<f64> = (t > 0)
            .then(|| {
                (0..n_runs)
                    .filter_map(|r| Some((find(r, t - 1)?, find(r, t)?)))
                    .filter_map(|(a, b)| {
                        phenotype_rate_of_change(&[a.profile.phenotype.clone(), b.profile.phenotype.clone()]).ok()
                    })
                    .map(|d| d[0])
                    .collect()
            })
            .unwrap_or_default();
        let rate = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
        table.push(vec![t.to_string(), here.len().to_string(), num(generality), opt_num(variance), opt_num(rate)]);
        series.push((t, variance, rate));
    }
    (table, series)
}

/// Linear and logarithmic fits over rounds 1.. (round 0 is the given program).
fn trend_table(champions: &[Champion], series: &[(u32, Option<f64>, Option<f64>)]) -> Table {
    let generality: Vec<(f64, f64)> =
        champions.iter().filter(|c| c.round >= 1).map(|c| (c.round as f64, c.profile.generality)).collect();
    let pick = |f: fn(&(u32, Option<f64>, Option<f64>)) -> Option<f64>| -> Vec<(f64, f64)> {
        series.iter().filter(|s| s.0 >= 1).filter_map(|s| f(s).map(|v| (s.0 as f64, v))).collect()
    };
    let metrics =
        [("generality", generality), ("phenotype_variance", pick(|s| s.1)), ("rate_of_change", pick(|s| s.2))];
    let mut table = Table::new(&["metric", "model", "points", "intercept", "slope", "p_value", "r_squared"]);
    for (name, points) in &metrics {
        for model in [TrendModel::Linear, TrendModel::Logarithmic] {
            let model_name = match model {
                TrendModel::Linear => "linear",
                TrendModel::Logarithmic => "log",
            };
            match fit_trend(points, model) {
                Ok(f) => table.push(vec![
                    name.to_string(),
                    model_name.into(),
                    points.len().to_string(),
                    num(f.intercept),
                    num(f.slope),
                    num(f.p_value),
                    num(f.r_squared),
                ]),
                Err(e) => eprintln!("trend {name}/{model_name}: {e}"),
            }
        }
    }
    table
}

fn cycle_table(runs: &[Lineage], bc: &BattleConfig, eps: f64) -> Result<Table, Failure> {
    let mut table = Table::new(&["run", "champions", "three_cycles", "anti_symmetric"]);
    for (r, lineage) in runs.iter().enumerate() {
        let m = DominanceMatrix::build(&lineage.champions, bc, eps)?;
        table.push(vec![
            r.to_string(),
            m.len().to_string(),
            count_3cycles(&m).to_string(),
            m.is_antisymmetric().to_string(),
        ]);
    }
    Ok(table)
}

/// Every champion with its generality and phenotype PCA coordinates.
fn champion_table(champions: &[Champion]) -> Result<Table, Failure> {
    let phenotypes: Vec<Vec<f64>> = champions.iter().map(|c| c.profile.phenotype.clone()).collect();
    let pca = match pca2(&phenotypes) {
        Ok(p) => {
            eprintln!("phenotype PCA explained variance: {} / {}", p.explained_variance[0], p.explained_variance[1]);
            Some(p)
        }
        Err(e) => {
            eprintln!("phenotype PCA skipped: {e}");
            None
        }
    };
    let mut table = Table::new(&["run", "round", "name", "digest", "generality", "pc1", "pc2"]);
    for (i, c) in champions.iter().enumerate() {
        let point = pca.as_ref().map(|p| p.points[i]);
        table.push(vec![
            c.run.to_string(),
            c.round.to_string(),
            c.warrior.name.clone(),
            c.warrior.digest_hex(),
            num(c.profile.generality),
            opt_num(point.map(|p| p[0])),
            opt_num(point.map(|p| p[1])),
        ]);
    }
    Ok(table)
}

fn probe_table(champions: &[Champion], embedder: &dyn Embedder, train: f64, lambda: f64) -> Result<Table, Failure> {
    let mut table = Table::new(&["embedder", "samples", "train_size", "test_size", "lambda", "train_r2", "test_r2"]);
    let warriors: Vec<Warrior> = champions.iter().map(|c| c.warrior.clone()).collect();
    let features: Vec<Vec<f64>> = genotypes(&warriors, embedder)
        .map_err(|e| Failure::new(crate::failure::Kind::Transport, e.to_string()))?
        .into_iter()
        .map(|g| g.vector)
        .collect();
    let targets: Vec<f64> = champions.iter().map(|c| c.profile.generality).collect();
    match train_probe(&features, &targets, train, lambda, 0) {
        Ok(fit) => table.push(vec![
            embedder.id(),
            champions.len().to_string(),
            fit.train_size.to_string(),
            fit.test_size.to_string(),
            num(lambda),
            num(fit.train_r2),
            num(fit.test_r2),
        ]),
        Err(e) => eprintln!("probe skipped: {e}"),
    }
    Ok(table)
}
