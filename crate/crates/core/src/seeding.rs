//! Counter-free child seed derivation.
//!
//! A task's seed is a hash of `(master seed, task path)`, so results never
//! depend on the order in which parallel tasks run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a 64-bit child seed from a master seed and a `/`-separated task path.
pub fn derive_seed(master: u64, path: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(path.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Seeded generator for a task path.
pub fn task_rng(master: u64, path: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
