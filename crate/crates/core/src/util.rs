use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Stable 64-bit hash of a sequence of byte strings (length-prefixed, so
/// `["ab", "c"]` and `["a", "bc"]` differ).
pub(crate) fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub(crate) fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Independent random stream for a labelled sub-task.
pub(crate) fn derived_rng(seed: u64, parts: &[&[u8]]) -> ChaCha8Rng {
    let seed_bytes = seed.to_le_bytes();
    let mut all: Vec<&[u8]> = vec![&seed_bytes];
    all.extend_from_slice(parts);
    ChaCha8Rng::seed_from_u64(stable_hash(&all))
}
