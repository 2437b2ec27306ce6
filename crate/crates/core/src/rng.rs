//! Reproducible seed derivation.
//!
//! Every random stream is identified by (root seed, replica index, purpose).
//! The triple is folded through the SplitMix64 finaliser, which is a
//! bijection on u64, so distinct replica indices under one root can never
//! collide. The derived value seeds a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Streams with different purposes are
/// independent even when they share root and index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Replica = 1,
    Noise = 2,
    Jump = 3,
    Chain = 4,
    Test = 5,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, index: u64, purpose: Purpose) -> u64 {
    let h = splitmix64(root);
    let h = splitmix64(h ^ index);
    splitmix64(h ^ (purpose as u64).wrapping_mul(GOLDEN))
}

/// Generator for one purpose under a (per-replica) seed.
pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, purpose))
}
