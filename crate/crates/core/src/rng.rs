//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator whose 256-bit key is expanded
//! with SplitMix64 from `(master seed, stream tag, index...)`. Streams are
//! addressed by lattice coordinates (slice index, site/bond group) or sweep
//! coordinates, never by call order, so results do not depend on how work
//! is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a list of words into one 64-bit seed.
pub fn derive(master: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &w in words {
        h = splitmix64(h ^ splitmix64(w.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// Independent generator for the stream addressed by `words`.
pub fn stream(master: u64, words: &[u64]) -> StreamRng {
    let mut key = [0u8; 32];
    let mut h = derive(master, words);
    for chunk in key.chunks_mut(8) {
        h = splitmix64(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream tags used by the model builders.
pub mod tag {
    pub const ONSITE: u64 = 1;
    pub const TRANSVERSE: u64 = 2;
    pub const LONGITUDINAL: u64 = 3;
    pub const SWEEP: u64 = 10;
    pub const RESAMPLE: u64 = 11;
    pub const SAMPLE: u64 = 12;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, &[1, 2]).random();
        let b: u64 = stream(7, &[1, 2]).random();
        let c: u64 = stream(7, &[2, 1]).random();
        let d: u64 = stream(8, &[1, 2]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn splitmix_reference_value() {
        // first output of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
