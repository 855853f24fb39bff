//! Bit-packed sparse binary hypervectors.
//!
//! A [`Hypervector`] is a fixed-width Boolean vector of `D` bits stored as
//! `ceil(D / 64)` little-endian machine words. Bit `p` lives in word `p / 64`
//! at bit offset `p % 64`. Padding bits above `D` in the last word are kept at
//! zero by every operation, so word-level popcounts never need masking.
//!
//! The two composition operations are:
//!
//! * **binding**: a cyclic shift ([`Hypervector::rotate`]), which moves a
//!   vector into a new, nearly orthogonal region of the space;
//! * **bundling**: elementwise OR ([`bundle`]), which superposes constituents.
//!
//! The module also carries the two analytic quantities used to reason about
//! token spaces: the exact token [`capacity`] and the token
//! [`overlap_likelihood`].

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask of valid bits in the last word of a `bits`-wide vector.
#[inline]
pub(crate) fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-width binary hypervector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    size: usize,
    words: Vec<u64>,
}

impl Hypervector {
    /// All-zero vector of dimension `size`.
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            words: vec![0; words_for(size)],
        }
    }

    /// All-ones vector of dimension `size`.
    pub fn ones(size: usize) -> Self {
        let mut v = Self {
            size,
            words: vec![u64::MAX; words_for(size)],
        };
        v.clear_padding();
        v
    }

    /// Builds a vector from set-bit positions. Duplicates are harmless.
    pub fn from_positions(size: usize, positions: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(size);
        for &p in positions {
            if p >= size {
                return Err(Error::PositionOutOfRange {
                    position: p,
                    size,
                });
            }
            v.set(p, true);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            v.set(i, true);
        }
        v
    }

    /// Wraps raw words. Padding bits beyond `size` are cleared.
    pub fn from_words(size: usize, mut words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(size) {
            return Err(Error::DimensionMismatch {
                expected: words_for(size) * WORD_BITS,
                found: words.len() * WORD_BITS,
            });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(size);
        }
        Ok(Self { size, words })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, p: usize) -> bool {
        debug_assert!(p < self.size);
        self.words[p / WORD_BITS] >> (p % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, p: usize, value: bool) {
        assert!(p < self.size, "bit {p} out of range for size {}", self.size);
        let bit = 1u64 << (p % WORD_BITS);
        if value {
            self.words[p / WORD_BITS] |= bit;
        } else {
            self.words[p / WORD_BITS] &= !bit;
        }
    }

    /// Number of set bits.
    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Set-bit positions in ascending order.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.popcount());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * WORD_BITS + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.size).map(|p| self.get(p)).collect()
    }

    pub fn complement(&self) -> Self {
        let mut v = Self {
            size: self.size,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_padding();
        v
    }

    /// Cyclic shift: bit `p` of `self` becomes bit `(p + k) mod D`.
    ///
    /// `k` may be negative or larger than `D`. Word-parallel when `D` is a
    /// multiple of 64, bitwise otherwise.
    pub fn rotate(&self, k: i64) -> Self {
        if self.size == 0 {
            return self.clone();
        }
        let d = self.size as i64;
        let k = k.rem_euclid(d) as usize;
        if k == 0 {
            return self.clone();
        }
        if self.size % WORD_BITS == 0 {
            return self.rotate_aligned(k);
        }
        let mut out = Self::zeros(self.size);
        for p in self.positions() {
            let q = p + k;
            out.set(if q >= self.size { q - self.size } else { q }, true);
        }
        out
    }

    fn rotate_aligned(&self, k: usize) -> Self {
        let n = self.words.len();
        let word_shift = k / WORD_BITS;
        let bit_shift = k % WORD_BITS;
        let mut words = vec![0u64; n];
        for (i, out) in words.iter_mut().enumerate() {
            // Output word i takes its low bits from source word i - word_shift
            // and, when bit_shift > 0, its high carry from the word before.
            let src = (i + n - word_shift) % n;
            let lo = self.words[src] << bit_shift;
            let hi = if bit_shift == 0 {
                0
            } else {
                self.words[(src + n - 1) % n] >> (WORD_BITS - bit_shift)
            };
            *out = lo | hi;
        }
        Self {
            size: self.size,
            words,
        }
    }

    /// Elementwise OR into `self`.
    pub fn or_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_size(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    /// ORs `other` rotated by `k` into `self` without allocating a temporary
    /// when possible.
    pub fn or_rotated(&mut self, other: &Self, k: i64) -> Result<()> {
        self.check_same_size(other)?;
        if k.rem_euclid(self.size.max(1) as i64) == 0 {
            return self.or_assign(other);
        }
        let d = self.size as i64;
        let k = k.rem_euclid(d) as usize;
        for p in other.positions() {
            let q = p + k;
            self.set(if q >= self.size { q - self.size } else { q }, true);
        }
        Ok(())
    }

    /// Popcount of the elementwise AND.
    pub fn overlap(&self, other: &Self) -> Result<usize> {
        self.check_same_size(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        Ok(())
    }

    fn clear_padding(&mut self) {
        let mask = tail_mask(self.size);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypervector(D={}, {:?})", self.size, self.positions())
    }
}

/// Compact serialized form: dimension plus ascending set positions.
#[derive(Serialize, Deserialize)]
struct SparseForm {
    size: usize,
    positions: Vec<usize>,
}

impl Serialize for Hypervector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SparseForm {
            size: self.size,
            positions: self.positions(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypervector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SparseForm::deserialize(d)?;
        Hypervector::from_positions(f.size, &f.positions).map_err(serde::de::Error::custom)
    }
}

/// Cyclic shift that attaches a role to a vector. Role `r` is a shift by `r`;
/// role 0 means "use the vector unshifted" and is not accepted here.
pub fn bind_role(v: &Hypervector, role_index: u32) -> Result<Hypervector> {
    if role_index == 0 {
        return Err(Error::InvalidConfig {
            field: "role_index",
            reason: "role 0 is the unshifted vector; use it directly".into(),
        });
    }
    Ok(v.rotate(role_index as i64))
}

/// Elementwise OR of all inputs.
pub fn bundle<'a, I>(vs: I) -> Result<Hypervector>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut it = vs.into_iter();
    let mut acc = it.next().ok_or(Error::EmptyInput("bundle"))?.clone();
    for v in it {
        acc.or_assign(v)?;
    }
    Ok(acc)
}

/// Number of distinct `s`-sparse supports in a `d`-wide vector, i.e. the
/// binomial coefficient `C(d, s)`, computed exactly.
pub fn capacity(d: u64, s: u64) -> Result<BigUint> {
    if s > d {
        return Err(Error::Domain(format!(
            "capacity needs S <= D, got S={s}, D={d}"
        )));
    }
    let k = s.min(d - s);
    let mut acc = BigUint::from(1u32);
    // Each prefix product is itself a binomial, so the division is exact.
    for i in 1..=k {
        acc *= d - k + i;
        acc /= i;
    }
    Ok(acc)
}

/// Probability that at least one of `t` tokens collides:
/// `1 - (1 - D^-P)^T`.
///
/// Evaluated as `-expm1(T * ln1p(-D^-P))` so that tiny `D^-P` (far below
/// machine epsilon) does not round the inner term to exactly one.
pub fn overlap_likelihood(d: u64, p: u32, t: u64) -> f64 {
    assert!(d >= 1 && p >= 1, "overlap_likelihood needs D >= 1 and P >= 1");
    if t == 0 {
        return 0.0;
    }
    if d == 1 {
        return 1.0;
    }
    let log_x = -(p as f64) * (d as f64).ln();
    let x = log_x.exp();
    if x == 0.0 {
        // D^-P underflowed; L ~ T * D^-P is below the smallest subnormal.
        return 0.0;
    }
    -((t as f64) * (-x).ln_1p()).exp_m1()
}
