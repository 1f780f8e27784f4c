//! MAP-Elites search for a program that performs well against a fixed
//! set of opponents.
//!
//! Candidates are proposed and evaluated in parallel batches; insertions are
//! applied sequentially in iteration order, so a run is reproducible for a
//! given batch size regardless of thread count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::{Archive, BehaviorDescriptor, Cell, Elite, GridSpec, Insertion};
use crate::battle::{evaluate, BattleConfig, BattleError};
use crate::mutation::{MutationError, MutationRequest, Mutator, Provenance};
use crate::par;
use crate::redcode::{parse_with, AsmOptions, Warrior};
use crate::seeds::derive_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub iterations: u64,
    pub grid: GridSpec,
    pub battle: BattleConfig,
    /// Candidates proposed against the same archive state. 1 is fully sequential.
    pub batch_size: usize,
    pub rng_seed: u64,
    /// Stamped on elites and events.
    pub round: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventOutcome {
    Inserted,
    Rejected,
    Invalid,
}

/// One line of the optimization log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    /// `None` for the initial population.
    pub iteration: Option<u64>,
    pub outcome: EventOutcome,
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cell: Option<Cell>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fitness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub descriptor: Option<BehaviorDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub best_fitness: Option<f64>,
    pub occupancy: usize,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub archive: Archive,
    pub events: Vec<Event>,
    /// Best archive fitness after each iteration; `None` while the archive is empty.
    pub best_per_iteration: Vec<Option<f64>>,
    pub evaluations: u64,
    pub invalid: u64,
}

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Battle(#[from] BattleError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
}

/// Fitness and behavior of `candidate` in a melee with `opponents`.
pub fn score_against(
    candidate: &Warrior,
    opponents: &[Warrior],
    bc: &BattleConfig,
) -> Result<(f64, BehaviorDescriptor), BattleError> {
    let mut field = Vec::with_capacity(opponents.len() + 1);
    field.push(candidate.clone());
    field.extend_from_slice(opponents);
    let report = evaluate(&field, bc)?;
    Ok((
        report.mean_fitness[0],
        BehaviorDescriptor {
            spawned_threads: report.mean_spawned_threads[0],
            memory_coverage: report.mean_memory_coverage[0],
        },
    ))
}

enum Candidate {
    Scored { warrior: Warrior, provenance: Option<Provenance>, fitness: f64, descriptor: BehaviorDescriptor },
    Invalid { provenance: Provenance, error: String },
}

fn asm_options(cfg: &OptimizeConfig, label: String) -> AsmOptions {
    AsmOptions::new(cfg.battle.mars.core_size, cfg.battle.mars.max_length as usize).with_default_name(label)
}

fn propose_and_score(
    archive: &Archive,
    opponents: &[Warrior],
    mutator: &dyn Mutator,
    cfg: &OptimizeConfig,
    iteration: u64,
) -> Result<Candidate, OptimizeError> {
    let mut rng = derive_rng(cfg.rng_seed, "candidate", iteration);
    let req = match archive.sample_elite(&mut rng) {
        Ok(parent) => MutationRequest::mutate(parent.warrior.source.clone()),
        Err(_) => MutationRequest::generate(),
    };
    let proposal = mutator.propose(&req, &mut rng)?;
    let asm = asm_options(cfg, format!("r{}-i{}", cfg.round, iteration));
    let mut warrior = match parse_with(&proposal.source, &asm) {
        Ok(w) => w,
        Err(e) => return Ok(Candidate::Invalid { provenance: proposal.provenance, error: e.to_string() }),
    };
    warrior.source = proposal.source;
    let (fitness, descriptor) = score_against(&warrior, opponents, &cfg.battle)?;
    Ok(Candidate::Scored { warrior, provenance: Some(proposal.provenance), fitness, descriptor })
}

struct Log<'a> {
    cfg: &'a OptimizeConfig,
    events: Vec<Event>,
}

impl Log<'_> {
    fn record(&mut self, archive: &mut Archive, iteration: Option<u64>, candidate: Candidate) {
        let event = match candidate {
            Candidate::Scored { warrior, provenance, fitness, descriptor } => {
                let digest = warrior.digest_hex();
                let (cell, insertion) = archive.try_insert(Elite {
                    warrior,
                    fitness,
                    descriptor,
                    round: self.cfg.round,
                    iteration: iteration.unwrap_or(0),
                });
                Event {
                    round: self.cfg.round,
                    iteration,
                    outcome: match insertion {
                        Insertion::Inserted => EventOutcome::Inserted,
                        Insertion::Rejected => EventOutcome::Rejected,
                    },
                    provenance,
                    digest: Some(digest),
                    cell: Some(cell),
                    fitness: Some(fitness),
                    descriptor: Some(descriptor),
                    error: None,
                    best_fitness: archive.best().map(|e| e.fitness),
                    occupancy: archive.len(),
                }
            }
            Candidate::Invalid { provenance, error } => Event {
                round: self.cfg.round,
                iteration,
                outcome: EventOutcome::Invalid,
                provenance: Some(provenance),
                digest: None,
                cell: None,
                fitness: None,
                descriptor: None,
                error: Some(error),
                best_fitness: archive.best().map(|e| e.fitness),
                occupancy: archive.len(),
            },
        };
        self.events.push(event);
    }
}

/// Runs MAP-Elites against `opponents`, seeding the archive with `initial`.
/// An empty archive makes the next proposals fresh generations.
pub fn optimize(
    opponents: &[Warrior],
    initial: &[Warrior],
    mutator: &dyn Mutator,
    cfg: &OptimizeConfig,
) -> Result<OptimizeResult, OptimizeError> {
    let mut archive = Archive::new(cfg.grid);
    let mut log = Log { cfg, events: Vec::new() };

    let scored = par::map_slice(initial, |w| score_against(w, opponents, &cfg.battle));
    for (w, s) in initial.iter().zip(scored) {
        let (fitness, descriptor) = s?;
        log.record(&mut archive, None, Candidate::Scored { warrior: w.clone(), provenance: None, fitness, descriptor });
    }

    let batch = cfg.batch_size.max(1) as u64;
    let mut best_per_iteration = Vec::with_capacity(cfg.iterations as usize);
    let mut invalid = 0;
    let mut next = 0u64;
    while next < cfg.iterations {
        let n = batch.min(cfg.iterations - next);
        let frozen = &archive;
        let results =
            par::map_range(n as usize, |k| propose_and_score(frozen, opponents, mutator, cfg, next + k as u64));
        for (k, candidate) in results.into_iter().enumerate() {
            let candidate = candidate?;
            if matches!(candidate, Candidate::Invalid { .. }) {
                invalid += 1;
            }
            log.record(&mut archive, Some(next + k as u64), candidate);
            best_per_iteration.push(archive.best().map(|e| e.fitness));
        }
        next += n;
    }

    Ok(OptimizeResult {
        evaluations: initial.len() as u64 + cfg.iterations - invalid,
        invalid,
        archive,
        events: log.events,
        best_per_iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mars::MarsConfig;
    use crate::mutation::{Proposal, RandomMutator};
    use crate::redcode::parse;
    use rand_chacha::ChaCha8Rng;

    fn cfg(iterations: u64, batch: usize) -> OptimizeConfig {
        let mars = MarsConfig::DESK;
        OptimizeConfig {
            iterations,
            grid: GridSpec::for_mars(&mars, 16),
            battle: BattleConfig::new(MarsConfig { max_cycles: 800, ..mars }, 2, 1),
            batch_size: batch,
            rng_seed: 5,
            round: 1,
        }
    }

    fn imp() -> Warrior {
        parse("MOV 0, 1", 800, 20).unwrap()
    }

    #[test]
    fn reproducible_for_fixed_batch_size() {
        let m = RandomMutator::new(800, 20);
        let a = optimize(&[imp()], &[], &m, &cfg(40, 8)).unwrap();
        let b = optimize(&[imp()], &[], &m, &cfg(40, 8)).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.archive.snapshot(), b.archive.snapshot());
    }

    #[test]
    fn best_fitness_never_decreases() {
        let m = RandomMutator::new(800, 20);
        let r = optimize(&[imp()], &[imp()], &m, &cfg(60, 4)).unwrap();
        assert_eq!(r.best_per_iteration.len(), 60);
        for w in r.best_per_iteration.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(r.events.iter().filter(|e| e.outcome == EventOutcome::Inserted).count() >= r.archive.len());
    }

    struct Garbage;
    impl Mutator for Garbage {
        fn name(&self) -> &str {
            "garbage"
        }
        fn propose(&self, _: &MutationRequest, _: &mut ChaCha8Rng) -> Result<Proposal, MutationError> {
            Ok(Proposal { source: "this is not redcode".into(), provenance: Provenance::Llm })
        }
    }

    #[test]
    fn invalid_candidates_are_counted() {
        let r = optimize(&[imp()], &[], &Garbage, &cfg(5, 2)).unwrap();
        assert_eq!(r.invalid, 5);
        assert!(r.archive.is_empty());
        assert!(r.events.iter().all(|e| e.outcome == EventOutcome::Invalid && e.error.is_some()));
    }
}
