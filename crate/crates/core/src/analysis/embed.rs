use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::redcode::{emit, Warrior};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("embedder unavailable: {0}")]
    Unavailable(String),
    #[error("embedder returned {got} vectors for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
    #[error("embedder returned vectors of differing dimension")]
    RaggedOutput,
}

/// Maps text to fixed-dimension vectors. Batched to suit remote services.
pub trait Embedder: Send + Sync {
    /// Distinguishes vector spaces; genotypes with different ids are not comparable.
    fn id(&self) -> String;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genotype {
    pub embedder: String,
    pub vector: Vec<f64>,
}

/// Embeddings of the canonical source of each warrior.
pub fn genotypes(warriors: &[Warrior], embedder: &dyn Embedder) -> Result<Vec<Genotype>, EmbedError> {
    let texts: Vec<String> = warriors.iter().map(emit).collect();
    let vectors = embedder.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(EmbedError::CountMismatch { expected: texts.len(), got: vectors.len() });
    }
    if vectors.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(EmbedError::RaggedOutput);
    }
    let id = embedder.id();
    Ok(vectors.into_iter().map(|vector| Genotype { embedder: id.clone(), vector }).collect())
}

pub fn genotype(w: &Warrior, embedder: &dyn Embedder) -> Result<Genotype, EmbedError> {
    Ok(genotypes(std::slice::from_ref(w), embedder)?.remove(0))
}

/// Offline embedder: signed feature hashing of character n-grams
/// (n = 2..=4), L2-normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashedNgramEmbedder {
    pub dimension: usize,
}

impl Default for HashedNgramEmbedder {
    fn default() -> Self {
        HashedNgramEmbedder { dimension: 256 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ *b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl HashedNgramEmbedder {
    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        let bytes = text.as_bytes();
        for n in 2..=4 {
            for gram in bytes.windows(n) {
                let h = fnv1a(gram);
                let slot = (h % self.dimension as u64) as usize;
                v[slot] += if h >> 63 == 0 { 1.0 } else { -1.0 };
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Embedder for HashedNgramEmbedder {
    fn id(&self) -> String {
        format!("hashed-ngram-{}", self.dimension)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
