//! Counter-based random streams.
//!
//! Every stream is addressed by `(master_seed, run_index, channel, counter)`.
//! The address is folded into a 64-bit key with the SplitMix64 finalizer
//! (Steele, Lea & Flood), and the `j`-th output of a stream is
//! `mix64(key + j * GOLDEN)`. Nothing is carried between streams, so the
//! reward for the `k`-th pull of arm `i` in run `r` depends only on
//! `(master_seed, r, i, k)`, whichever policy happens to be pulling.

use rand::RngCore;

/// Weyl increment of SplitMix64 (odd, close to 2^64 / phi).
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

const TAG_ENV: u64 = 0x454E_565F_4152_4D00; // "ENV_ARM\0"
const TAG_POLICY: u64 = 0x504F_4C49_4359_0000; // "POLICY\0\0"

/// SplitMix64 output function: a bijective 64-bit avalanche mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which consumer a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Rewards of one arm. Index is the arm position in the instance.
    EnvArm(usize),
    /// Randomness consumed by the arm-selection rule.
    PolicyPerturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub run_index: u64,
    pub channel: Channel,
    pub counter: u64,
}

impl StreamKey {
    pub fn env(run_index: u64, arm: usize, pull: u64) -> Self {
        Self {
            run_index,
            channel: Channel::EnvArm(arm),
            counter: pull,
        }
    }

    pub fn policy(run_index: u64) -> Self {
        Self {
            run_index,
            channel: Channel::PolicyPerturb,
            counter: 0,
        }
    }
}

/// A deterministic stream of 64-bit words.
///
/// Value type: clone it to fork, move it to another thread freely, but do
/// not expect two clones to produce different numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    position: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, key: StreamKey) -> Self {
        let (tag, sub) = match key.channel {
            Channel::EnvArm(arm) => (TAG_ENV, arm as u64),
            Channel::PolicyPerturb => (TAG_POLICY, 0),
        };
        let mut h = mix64(master_seed ^ tag);
        h = mix64(h.wrapping_add(key.run_index).wrapping_mul(GOLDEN) ^ sub);
        h = mix64(h ^ mix64(key.counter.wrapping_add(GOLDEN)));
        Self {
            key: h,
            position: 0,
        }
    }

    /// Number of words drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.position = self.position.wrapping_add(1);
        mix64(self.key.wrapping_add(self.position.wrapping_mul(GOLDEN)))
    }

    /// Uniform on the open interval (0, 1): 52 random bits placed at the
    /// midpoints of a 2^-52 grid, so neither 0 nor 1 can occur.
    #[inline]
    pub fn open_unit(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
        ((self.next_word() >> 12) as f64 + 0.5) * SCALE
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_word() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_word()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_word().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_reference_values() {
        // First outputs of the reference SplitMix64 seeded with 0.
        assert_eq!(mix64(GOLDEN), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(GOLDEN.wrapping_mul(2)), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn same_key_same_sequence() {
        let key = StreamKey::env(3, 1, 17);
        let mut a = RngStream::new(42, key);
        let mut b = RngStream::new(42, key);
        for _ in 0..100 {
            assert_eq!(a.next_word(), b.next_word());
        }
    }

    #[test]
    fn distinct_keys_differ() {
        let base = RngStream::new(0, StreamKey::env(0, 0, 0))
            .clone()
            .next_word();
        let others = [
            RngStream::new(1, StreamKey::env(0, 0, 0)),
            RngStream::new(0, StreamKey::env(1, 0, 0)),
            RngStream::new(0, StreamKey::env(0, 1, 0)),
            RngStream::new(0, StreamKey::env(0, 0, 1)),
            RngStream::new(0, StreamKey::policy(0)),
        ];
        for mut s in others {
            assert_ne!(s.next_word(), base);
        }
    }

    #[test]
    fn open_unit_never_hits_endpoints() {
        let mut s = RngStream::new(7, StreamKey::policy(0));
        for _ in 0..100_000 {
            let u = s.open_unit();
            assert!(u > 0.0 && u < 1.0);
        }
        // Extreme words map strictly inside (0, 1).
        const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
        let (lo, hi) = (0.5 * SCALE, ((u64::MAX >> 12) as f64 + 0.5) * SCALE);
        assert!(lo > 0.0 && hi < 1.0);
    }

    #[test]
    fn open_unit_mean_and_variance() {
        let mut s = RngStream::new(11, StreamKey::policy(5));
        let n = 200_000;
        let (mut m, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let u = s.open_unit();
            m += u;
            m2 += u * u;
        }
        m /= n as f64;
        m2 /= n as f64;
        assert!((m - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / n as f64).sqrt());
        assert!((m2 - m * m - 1.0 / 12.0).abs() < 1e-3);
    }
}
