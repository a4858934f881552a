//! Counter-based pseudorandom function used for every randomization.
//!
//! All randomness is a pure function of a [`StreamKey`] and a 64-bit counter,
//! so scrambles can be evaluated lazily, in any order, from any thread, and
//! reproduce bit-for-bit across platforms. The mixer is the SplitMix64
//! finalizer (Stafford's "Mix13" constants) applied twice with the key
//! injected between rounds:
//!
//! ```text
//! block(key, counter) = mix64(mix64(counter ^ key) + rotl(key, 32))
//! ```
//!
//! Stream keys are derived by absorbing `(seed, replicate, purpose, dimension)`
//! one word at a time through the same mixer.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finalizer. A bijection on `u64`.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a stream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Owen = 1,
    LinearScramble = 2,
    DigitalShift = 3,
    Uniform = 4,
}

/// Key of one independent pseudorandom stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64, replicate: u64, purpose: Purpose, dimension: u64) -> Self {
        let mut h = mix64(seed.wrapping_add(GOLDEN));
        for word in [replicate, purpose as u64, dimension] {
            h = mix64(h ^ mix64(word.wrapping_add(GOLDEN)));
        }
        StreamKey(h)
    }

    /// Child key, used to give each digit depth of an Owen tree its own stream.
    #[inline]
    pub fn child(self, index: u64) -> Self {
        StreamKey(mix64(self.0 ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(1))))
    }

    #[inline]
    pub fn block(self, counter: u64) -> u64 {
        mix64(mix64(counter ^ self.0).wrapping_add(self.0.rotate_left(32)))
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(self, counter: u64) -> f64 {
        (self.block(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_is_not_identity_and_fixes_zero() {
        assert_eq!(mix64(0), 0);
        assert_ne!(mix64(1), 1);
    }

    #[test]
    fn keys_differ_by_every_field() {
        let base = StreamKey::new(7, 0, Purpose::Owen, 0);
        assert_ne!(base, StreamKey::new(8, 0, Purpose::Owen, 0));
        assert_ne!(base, StreamKey::new(7, 1, Purpose::Owen, 0));
        assert_ne!(base, StreamKey::new(7, 0, Purpose::DigitalShift, 0));
        assert_ne!(base, StreamKey::new(7, 0, Purpose::Owen, 1));
        assert_eq!(base, StreamKey::new(7, 0, Purpose::Owen, 0));
    }

    #[test]
    fn output_bits_are_balanced() {
        let key = StreamKey::new(1, 2, Purpose::Uniform, 3);
        let n = 1 << 16;
        let ones: u32 = (0..n).map(|c| key.block(c).count_ones()).sum();
        let mean = ones as f64 / n as f64;
        // 64 fair bits per word: sd of the mean is 4 / 256.
        assert!((mean - 32.0).abs() < 0.1, "mean popcount {mean}");
    }

    #[test]
    fn uniform_in_unit_interval() {
        let key = StreamKey::new(0, 0, Purpose::Uniform, 0);
        let mut sum = 0.0;
        for c in 0..10_000 {
            let u = key.uniform(c);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        assert!((sum / 10_000.0 - 0.5).abs() < 0.01);
    }
}
