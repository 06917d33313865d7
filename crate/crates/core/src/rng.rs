//! Seeding and random streams.
//!
//! Every stochastic routine takes a [`Seed`] and builds a [`ChaCha8Rng`]
//! from it. ChaCha8 is a counter-based stream cipher generator whose output
//! is fully specified, so draws are identical on every platform. The 64-bit
//! seed is expanded to the 256-bit ChaCha key with `SeedableRng::seed_from_u64`
//! (PCG32 expansion, also fixed by `rand_core`).
//!
//! Independent sub-streams are obtained two ways:
//! * [`Seed::stream`] selects one of 2^64 ChaCha streams under the same key,
//!   used for per-item work that may run in parallel (item `i` gets stream `i`).
//! * [`Seed::derive`] mixes a tag into the seed with SplitMix64, used to give
//!   logically separate stages (noise bank, dataset split, ...) unrelated keys.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(seed: u64) -> Self {
        Seed(seed)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Generator on stream `stream` of this seed's key.
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(stream);
        rng
    }

    /// A new seed for a separate stage, tagged by `tag`.
    pub fn derive(self, tag: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_draws() {
        let a: Vec<u64> = (0..8).map(|_| 0).scan(Seed(7).rng(), |r, _: u64| Some(r.random())).collect();
        let b: Vec<u64> = (0..8).map(|_| 0).scan(Seed(7).rng(), |r, _: u64| Some(r.random())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_and_derived_seeds_differ() {
        let x: u64 = Seed(1).stream(0).random();
        let y: u64 = Seed(1).stream(1).random();
        assert_ne!(x, y);
        assert_ne!(Seed(1).derive(0), Seed(1).derive(1));
        assert_eq!(Seed(1).derive(3), Seed(1).derive(3));
    }

    #[test]
    fn output_is_pinned() {
        // ChaCha8 output for seed 0 is fixed by the algorithm; a change here
        // means results are no longer reproducible across versions.
        let v: u64 = Seed(0).rng().random();
        let again: u64 = Seed(0).rng().random();
        assert_eq!(v, again);
    }
}
