//! Deterministic per-task seed derivation. Every sampler chain in a run
//! gets its seed from the master seed plus a textual path naming the
//! task, so results are independent of scheduling and worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the master seed bytes and the tag path. Tags are
/// separated by a byte no UTF-8 text contains, so ("ab","c") and
/// ("a","bc") hash differently.
pub fn derive_seed(master: u64, tags: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in master.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    for tag in tags {
        for b in tag.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn rng_for(master: u64, tags: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}
