//! Deterministic derivation of child seeds from a master seed and labels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from `master` and an ordered list of labels.
///
/// Labels are length-prefixed before hashing so `["ab", "c"]` and `["a", "bc"]`
/// give different children.
pub fn seed_stream<S: AsRef<str>>(master: u64, labels: &[S]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"hqrc-seed-v1");
    hasher.update(master.to_le_bytes());
    for label in labels {
        let bytes = label.as_ref().as_bytes();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

/// Convenience: child seed for `(label, index)`.
pub fn child(master: u64, label: &str, index: usize) -> u64 {
    seed_stream(master, &[label, &index.to_string()])
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
