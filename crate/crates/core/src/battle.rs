//! Seeded battles and the time-shared survival fitness.
//!
//! In a battle of `N` warriors over `T` timesteps, `N` units of fitness are
//! handed out evenly over time: at every timestep the living warriors split
//! `N / T` equally. When nobody is alive the share is split among all `N`
//! warriors, which keeps the per-battle total at exactly `N`. A battle that
//! stops early is scored as if its final state persisted until `T`.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mars::{BattleTrace, Mars, MarsConfig, MarsError};
use crate::par;
use crate::redcode::Warrior;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleConfig {
    pub mars: MarsConfig,
    pub seeds_per_battle: u32,
    pub rng_seed: u64,
}

impl BattleConfig {
    pub fn new(mars: MarsConfig, seeds_per_battle: u32, rng_seed: u64) -> Self {
        BattleConfig { mars, seeds_per_battle, rng_seed }
    }

    /// Same settings with a different seed stream.
    pub fn reseeded(&self, rng_seed: u64) -> Self {
        BattleConfig { rng_seed, ..*self }
    }
}

impl Default for BattleConfig {
    fn default() -> Self {
        BattleConfig { mars: MarsConfig::PAPER, seeds_per_battle: 20, rng_seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BattleError {
    #[error("{n} warriors cannot be placed (at most {max} fit)")]
    Infeasible { n: usize, max: usize },
    #[error("seeds_per_battle must be at least 1")]
    NoSeeds,
    #[error(transparent)]
    Mars(#[from] MarsError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub mean_fitness: Vec<f64>,
    /// `per_seed[s][i]`: fitness of warrior `i` in seed `s`.
    pub per_seed: Vec<Vec<f64>>,
    pub mean_spawned_threads: Vec<f64>,
    pub mean_memory_coverage: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    AWins,
    BWins,
    Tie,
}

impl Outcome {
    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::AWins => Outcome::BWins,
            Outcome::BWins => Outcome::AWins,
            Outcome::Tie => Outcome::Tie,
        }
    }
}

/// Strict-inequality defeat relation with an exact-tie band of `tie_epsilon`.
pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

fn check_feasible(n: usize, cfg: &MarsConfig) -> Result<(), BattleError> {
    cfg.validate()?;
    let max = cfg.max_warriors();
    if n == 0 || n > max {
        return Err(BattleError::Infeasible { n, max });
    }
    Ok(())
}

/// Uniformly random start addresses for `n` warriors, cyclically at least
/// `max_length + min_separation` apart.
pub fn random_placements(n: usize, cfg: &MarsConfig, seed: u64) -> Result<Vec<u32>, BattleError> {
    check_feasible(n, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(placements_with(n, cfg, &mut rng))
}

fn placements_with(n: usize, cfg: &MarsConfig, rng: &mut impl Rng) -> Vec<u32> {
    let size = cfg.core_size as u64;
    let origin = rng.gen_range(0..size);
    if n == 1 {
        return vec![origin as u32];
    }
    // Spread the spare cells over the n gaps as a uniform random composition
    // (stars and bars), then hand the slots to warriors in random order.
    let slack = size - n as u64 * cfg.footprint();
    let mut bars: Vec<u64> =
        index::sample(rng, (slack as usize) + n - 1, n - 1).into_iter().map(|b| b as u64).collect();
    bars.sort_unstable();
    let mut slots = Vec::with_capacity(n);
    let mut pos = origin;
    let mut prev_bar: i64 = -1;
    for k in 0..n {
        slots.push((pos % size) as u32);
        let bar = if k + 1 < n { bars[k] as i64 } else { (slack as i64) + n as i64 - 1 };
        let extra = (bar - prev_bar - 1) as u64;
        prev_bar = bar;
        pos += cfg.footprint() + extra;
    }
    slots.shuffle(rng);
    slots
}

/// Evaluate the survival-share sum for every warrior in `trace`.
///
/// Timesteps are grouped by how many warriors were alive, so the result is a
/// short sum of exact ratios rather than `T` accumulated increments.
pub fn fitness_from_trace(trace: &BattleTrace, n: usize, max_cycles: u32) -> Vec<f64> {
    assert_eq!(trace.warriors(), n, "trace has a different warrior count");
    let total = max_cycles as u64;
    // Segment boundaries: every distinct death time within the horizon.
    let mut cuts: Vec<u64> = trace.death_cycle.iter().flatten().map(|&d| (d as u64).min(total + 1)).collect();
    cuts.push(total + 1);
    cuts.sort_unstable();
    cuts.dedup();

    // alive_steps[i][s]: timesteps warrior i was alive with s living warriors.
    let mut alive_steps = vec![vec![0u64; n + 1]; n];
    let mut all_dead_steps = 0u64;
    let mut from = 1u64;
    for cut in cuts {
        if cut <= from {
            continue;
        }
        let len = cut - from;
        let alive: Vec<usize> = (0..n).filter(|&i| trace.alive(i, from as u32)).collect();
        if alive.is_empty() {
            all_dead_steps += len;
        } else {
            for &i in &alive {
                alive_steps[i][alive.len()] += len;
            }
        }
        from = cut;
    }

    let (nf, tf) = (n as f64, total as f64);
    alive_steps
        .iter()
        .map(|counts| {
            let shared: f64 = counts
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &c)| c > 0)
                .map(|(s, &c)| (c as f64 * nf) / (tf * s as f64))
                .sum();
            shared + all_dead_steps as f64 / tf
        })
        .collect()
}

/// Seed of battle `index` for this warrior multiset. Warrior order does not
/// matter: digests are sorted before hashing.
pub fn battle_seed(rng_seed: u64, warriors: &[Warrior], index: u32) -> u64 {
    let mut digests: Vec<[u8; 32]> = warriors.iter().map(Warrior::digest).collect();
    digests.sort_unstable();
    let mut hasher = Sha256::new();
    hasher.update(b"drq.battle.v1");
    hasher.update(rng_seed.to_le_bytes());
    hasher.update((digests.len() as u64).to_le_bytes());
    for d in &digests {
        hasher.update(d);
    }
    hasher.update(index.to_le_bytes());
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

/// One seeded battle. Returns the trace (indexed like `warriors`), the
/// placements (indexed like `warriors`) and the loading order used.
pub struct SeededBattle {
    pub trace: BattleTrace,
    pub placements: Vec<u32>,
    pub load_order: Vec<usize>,
}

/// Set up battle `index` without running it. `load_order[k]` is the index in
/// `warriors` of the k-th loaded warrior (Mars warrior id k).
/// `slots[k]` is the base address of the k-th loaded warrior.
pub fn prepare_battle(
    warriors: &[Warrior],
    bc: &BattleConfig,
    index: u32,
) -> Result<(Mars, Vec<usize>, Vec<u32>), BattleError> {
    check_feasible(warriors.len(), &bc.mars)?;
    let n = warriors.len();
    let mut canonical: Vec<usize> = (0..n).collect();
    let digests: Vec<[u8; 32]> = warriors.iter().map(Warrior::digest).collect();
    canonical.sort_by_key(|&i| digests[i]);

    let mut rng = ChaCha8Rng::seed_from_u64(battle_seed(bc.rng_seed, warriors, index));
    let mut load_order = canonical;
    load_order.shuffle(&mut rng);
    let slots = placements_with(n, &bc.mars, &mut rng);
    let loaded: Vec<Warrior> = load_order.iter().map(|&i| warriors[i].clone()).collect();
    let mars = Mars::load(&loaded, &slots, &bc.mars)?;
    Ok((mars, load_order, slots))
}

pub fn run_seed(warriors: &[Warrior], bc: &BattleConfig, index: u32) -> Result<SeededBattle, BattleError> {
    let (mut mars, load_order, slots) = prepare_battle(warriors, bc, index)?;
    let loaded_trace = mars.run(bc.mars.max_cycles);
    let n = warriors.len();
    let mut trace = BattleTrace {
        end_cycle: loaded_trace.end_cycle,
        death_cycle: vec![None; n],
        spawned_threads: vec![0; n],
        memory_coverage: vec![0; n],
    };
    let mut placements = vec![0; n];
    for (k, &i) in load_order.iter().enumerate() {
        trace.death_cycle[i] = loaded_trace.death_cycle[k];
        trace.spawned_threads[i] = loaded_trace.spawned_threads[k];
        trace.memory_coverage[i] = loaded_trace.memory_coverage[k];
        placements[i] = slots[k];
    }
    Ok(SeededBattle { trace, placements, load_order })
}

/// Run `seeds_per_battle` seeded battles and average.
pub fn evaluate(warriors: &[Warrior], bc: &BattleConfig) -> Result<FitnessReport, BattleError> {
    if bc.seeds_per_battle == 0 {
        return Err(BattleError::NoSeeds);
    }
    check_feasible(warriors.len(), &bc.mars)?;
    let n = warriors.len();
    let runs = par::map_range(bc.seeds_per_battle as usize, |s| run_seed(warriors, bc, s as u32));
    let mut per_seed = Vec::with_capacity(runs.len());
    let mut threads = vec![0.0; n];
    let mut coverage = vec![0.0; n];
    for run in runs {
        let run = run?;
        per_seed.push(fitness_from_trace(&run.trace, n, bc.mars.max_cycles));
        for i in 0..n {
            threads[i] += run.trace.spawned_threads[i] as f64;
            coverage[i] += run.trace.memory_coverage[i] as f64;
        }
    }
    let seeds = per_seed.len() as f64;
    let mean_fitness = (0..n).map(|i| per_seed.iter().map(|f| f[i]).sum::<f64>() / seeds).collect();
    Ok(FitnessReport {
        mean_fitness,
        per_seed,
        mean_spawned_threads: threads.into_iter().map(|t| t / seeds).collect(),
        mean_memory_coverage: coverage.into_iter().map(|c| c / seeds).collect(),
    })
}

pub fn outcome_from_means(fa: f64, fb: f64, tie_epsilon: f64) -> Outcome {
    if fa > fb + tie_epsilon {
        Outcome::AWins
    } else if fb > fa + tie_epsilon {
        Outcome::BWins
    } else {
        Outcome::Tie
    }
}

/// 1-on-1 result. Identical programs tie without simulation.
pub fn outcome(a: &Warrior, b: &Warrior, bc: &BattleConfig, tie_epsilon: f64) -> Result<Outcome, BattleError> {
    if a.digest() == b.digest() {
        return Ok(Outcome::Tie);
    }
    let report = evaluate(&[a.clone(), b.clone()], bc)?;
    Ok(outcome_from_means(report.mean_fitness[0], report.mean_fitness[1], tie_epsilon))
}
