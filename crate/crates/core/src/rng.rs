//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream seeded with
//! `derive_seed(master, role, index)`. The role tag separates independent
//! consumers (hidden layers, validation split, fold plans) so that changing
//! one never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod roles {
    pub const LAYER: &str = "elm-layer";
    pub const VALIDATION: &str = "validation-split";
    pub const FOLDS: &str = "kfold";
    pub const TRAINING: &str = "training";
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(master ^ fnv1a(role) ^ splitmix64(index))`.
pub fn derive_seed(master: u64, role: &str, index: u64) -> u64 {
    let tag = role
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME));
    splitmix64(master ^ tag ^ splitmix64(index))
}

pub fn rng_for(master: u64, role: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, role, index))
}
