//! Seeding conventions.
//!
//! Every random stream in the crate is a `Xoshiro256PlusPlus` generator. A
//! stream is addressed by a base seed plus a path of stream identifiers, mixed
//! together with the SplitMix64 finalizer, so that e.g. the exploration noise
//! of seed 3 never shares state with its network initialization.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a stream identifier.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    rng_from(derive(seed, stream))
}

/// Stream identifiers used by the training stack.
pub mod streams {
    pub const ACTOR_INIT: u64 = 1;
    pub const CRITIC_INIT: u64 = 2;
    pub const EXPLORATION: u64 = 3;
    pub const REPLAY: u64 = 4;
    pub const UPDATE_NOISE: u64 = 5;
    pub const TRAIN_RESET: u64 = 6;
    pub const EVAL_RESET: u64 = 7;
    pub const EVAL_NOISE: u64 = 8;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 sequence seeded with 0.
        let mut state = 0u64;
        let mut next = || {
            let out = splitmix64(state);
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            out
        };
        assert_eq!(next(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(next(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a = stream(0, 1).next_u64();
        let b = stream(0, 2).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, stream(0, 1).next_u64());
    }
}
