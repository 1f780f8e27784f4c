//! Population analyses over champions and lineages.

mod dominance;
mod embed;
mod pca;
mod population;
mod probe;
mod spectral;
mod stats;

pub use dominance::{count_3cycles, DominanceMatrix, Relation};
pub use embed::{genotype, genotypes, EmbedError, Embedder, Genotype, HashedNgramEmbedder};
pub use pca::{pca2, Pca2};
pub use population::{generality, generality_from_outcomes, phenotype, versus, Matchup};
pub use probe::{train_probe, ProbeFit};
pub use stats::{cross_run_variance, fit_trend, phenotype_rate_of_change, TrendFit, TrendModel};

use thiserror::Error;

use crate::battle::BattleError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Battle(#[from] BattleError),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("need at least {needed} inputs, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("vector dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("degenerate design: {0}")]
    DegenerateDesign(&'static str),
    #[error("invalid dominance matrix: {0}")]
    InvalidMatrix(String),
}

fn check_dims(vectors: &[Vec<f64>]) -> Result<usize, AnalysisError> {
    let d = vectors.first().map_or(0, Vec::len);
    for v in vectors {
        if v.len() != d {
            return Err(AnalysisError::DimensionMismatch(d, v.len()));
        }
    }
    Ok(d)
}
