use super::AnalysisError;
use crate::battle::{evaluate, outcome_from_means, BattleConfig, Outcome};
use crate::par;
use crate::redcode::Warrior;

/// Result of one program against one opponent in 1-on-1 battles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matchup {
    pub fitness: f64,
    pub opponent_fitness: f64,
    pub outcome: Outcome,
}

/// 1-on-1 results of `w` against every opponent, in corpus order.
pub fn versus(
    w: &Warrior,
    corpus: &[Warrior],
    bc: &BattleConfig,
    tie_epsilon: f64,
) -> Result<Vec<Matchup>, AnalysisError> {
    let digest = w.digest();
    par::map_slice(corpus, |opp| {
        let report = evaluate(&[w.clone(), opp.clone()], bc)?;
        let (fitness, opponent_fitness) = (report.mean_fitness[0], report.mean_fitness[1]);
        let outcome = if opp.digest() == digest {
            Outcome::Tie
        } else {
            outcome_from_means(fitness, opponent_fitness, tie_epsilon)
        };
        Ok(Matchup { fitness, opponent_fitness, outcome })
    })
    .into_iter()
    .collect()
}

/// Fraction of matchups won or tied.
pub fn generality_from_outcomes(outcomes: &[Outcome]) -> Result<f64, AnalysisError> {
    if outcomes.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let ok = outcomes.iter().filter(|o| **o != Outcome::BWins).count();
    Ok(ok as f64 / outcomes.len() as f64)
}

pub fn generality(w: &Warrior, corpus: &[Warrior], bc: &BattleConfig, tie_epsilon: f64) -> Result<f64, AnalysisError> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let outcomes: Vec<_> = versus(w, corpus, bc, tie_epsilon)?.into_iter().map(|m| m.outcome).collect();
    generality_from_outcomes(&outcomes)
}

/// Mean 1-on-1 fitness against each opponent, in corpus order.
pub fn phenotype(w: &Warrior, corpus: &[Warrior], bc: &BattleConfig) -> Result<Vec<f64>, AnalysisError> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    Ok(versus(w, corpus, bc, 0.0)?.into_iter().map(|m| m.fitness).collect())
}
