//! Deterministic random streams.
//!
//! Every stream in the crate is derived from a 64-bit master seed plus a
//! label, hashed with SHA-256 into a xoshiro256++ state. Streams for
//! different purposes (token generation, sample shuffling, per-bank
//! feedback, ensemble replicas) therefore never share state, and any one of
//! them can be recreated in isolation.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

pub type StreamRng = Xoshiro256PlusPlus;

/// Stream keyed on `(seed, label parts)`.
pub fn derive_stream(seed: u64, parts: &[&[u8]]) -> StreamRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest: [u8; 32] = h.finalize().into();
    StreamRng::from_seed(digest)
}

/// Derives a child seed, e.g. one per ensemble replica.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    derive_stream(seed, &[label.as_bytes(), &index.to_le_bytes()]).next_u64()
}

/// Converts a probability to a 32-bit comparison threshold.
///
/// `None` means "always" (p >= 1); `Some(0)` means "never".
#[inline]
pub fn threshold(p: f64) -> Option<u32> {
    if p >= 1.0 {
        None
    } else if p <= 0.0 {
        Some(0)
    } else {
        Some((p * 4_294_967_296.0).round().min(u32::MAX as f64) as u32)
    }
}

/// One Bernoulli draw against a threshold from [`threshold`].
#[inline]
pub fn draw<R: RngCore + ?Sized>(rng: &mut R, t: Option<u32>) -> bool {
    match t {
        None => true,
        Some(0) => false,
        Some(t) => rng.next_u32() < t,
    }
}

/// 64 independent Bernoulli draws packed into a word.
///
/// Each lane compares a uniform 32-bit integer against `t`, consumed from the
/// stream most-significant bit first; lanes are resolved as soon as their
/// prefix differs from `t`, so a mask typically costs about seven words of
/// randomness rather than 32.
#[inline]
pub fn bernoulli_mask<R: RngCore + ?Sized>(rng: &mut R, t: Option<u32>) -> u64 {
    let t = match t {
        None => return u64::MAX,
        Some(0) => return 0,
        Some(t) => t,
    };
    let mut undecided = u64::MAX;
    let mut below = 0u64;
    for bit in (0..32).rev() {
        let r = rng.next_u64();
        let tb = if (t >> bit) & 1 == 1 { u64::MAX } else { 0 };
        // Lane drew 0 where threshold has 1: lane value is below threshold.
        below |= undecided & !r & tb;
        undecided &= !(r ^ tb);
        if undecided == 0 {
            break;
        }
    }
    below
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_label_separated() {
        let a = derive_stream(7, &[b"bank", &0u64.to_le_bytes()]).next_u64();
        let b = derive_stream(7, &[b"bank", &0u64.to_le_bytes()]).next_u64();
        let c = derive_stream(7, &[b"bank", &1u64.to_le_bytes()]).next_u64();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // Length prefixes keep ("ab","c") and ("a","bc") apart.
        let x = derive_stream(1, &[b"ab", b"c"]).next_u64();
        let y = derive_stream(1, &[b"a", b"bc"]).next_u64();
        assert_ne!(x, y);
    }

    #[test]
    fn threshold_edges() {
        assert_eq!(threshold(1.0), None);
        assert_eq!(threshold(0.0), Some(0));
        assert_eq!(threshold(0.5), Some(1 << 31));
    }

    #[test]
    fn mask_rate_matches_probability() {
        let mut rng = derive_stream(3, &[b"mask"]);
        for p in [0.01, 0.2, 0.5, 0.75, 0.99] {
            let t = threshold(p);
            let n = 4000;
            let ones: u64 = (0..n)
                .map(|_| bernoulli_mask(&mut rng, t).count_ones() as u64)
                .sum();
            let trials = (n * 64) as f64;
            let rate = ones as f64 / trials;
            let se = (p * (1.0 - p) / trials).sqrt();
            assert!((rate - p).abs() < 4.0 * se, "p={p} rate={rate}");
        }
        assert_eq!(bernoulli_mask(&mut rng, None), u64::MAX);
        assert_eq!(bernoulli_mask(&mut rng, Some(0)), 0);
    }
}
