//! Deterministic seed derivation so every stochastic step is addressable by
//! (base seed, domain, index) and independent of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(base: u64, domain: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"drq.seed.v1");
    h.update(base.to_le_bytes());
    h.update((domain.len() as u64).to_le_bytes());
    h.update(domain.as_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

pub fn derive_rng(base: u64, domain: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, domain, index))
}
