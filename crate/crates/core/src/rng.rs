//! Seeded random streams.
//!
//! All randomness in the crate flows from [`ChaCha8Rng`] instances built here, so a
//! run is a pure function of its seeds.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Generator for the given seed on stream 0.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the given seed on a separate stream. Streams of one seed never overlap.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a key path into a child seed.
///
/// The result depends only on `(master, parts)`, so adding new keys to a grid never
/// changes the seeds of existing keys.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_is_stable_and_key_sensitive() {
        assert_eq!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 2, 3]));
        assert_ne!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 3, 2]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = seeded_stream(1, 0).random();
        let b: u64 = seeded_stream(1, 1).random();
        let c: u64 = seeded(1).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
