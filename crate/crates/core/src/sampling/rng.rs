//! Counter-based SplitMix64.
//!
//! Output `k` of the stream seeded with `s` is `mix(s + (k + 1)·γ)` with
//! `γ = 0x9E3779B97F4A7C15`, so any index is reachable without replaying the
//! stream. The sequence equals the classic sequential SplitMix64.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream position `index` for `seed`.
#[inline]
pub fn at(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Maps 64 random bits to the open interval (0, 1): the top 52 bits shifted
/// by half a step, so both ends stay representable away from 0 and 1.
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Sequential view over a counter-based stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Independent child stream: seeded with output `index` of this seed.
    pub fn derive(seed: u64, index: u64) -> Self {
        Self::new(at(seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = at(self.seed, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform integer in `0..bound` by 128-bit multiply-shift.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}
