//! Stable seed derivation: a SHA-256 digest of a tag and integer parts, so
//! that streams never depend on scheduling, platform or hasher state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(tag: &str, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

pub fn rng_for(tag: &str, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(tag, parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_inputs_distinct_seeds() {
        assert_eq!(derive_seed("a", &[1, 2]), derive_seed("a", &[1, 2]));
        assert_ne!(derive_seed("a", &[1, 2]), derive_seed("a", &[2, 1]));
        assert_ne!(derive_seed("a", &[1]), derive_seed("b", &[1]));
        // length prefix keeps tag and parts from bleeding into each other
        assert_ne!(derive_seed("", &[0]), derive_seed("\0\0\0\0\0\0\0\0", &[]));
    }
}
