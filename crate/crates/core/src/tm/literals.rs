use crate::error::{Error, Result};
use crate::hv::{tail_mask, words_for, Hypervector};

/// The literal pool of one input: `2D` Booleans, features `h_i` at indices
/// `0..D` followed by their negations at `D..2D`.
///
/// Stored as two packed halves so that the negated half is word-aligned
/// regardless of `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literals {
    num_features: usize,
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl Literals {
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn len(&self) -> usize {
        2 * self.num_features
    }

    pub fn is_empty(&self) -> bool {
        self.num_features == 0
    }

    pub fn get(&self, literal: usize) -> bool {
        let (half, k) = if literal < self.num_features {
            (&self.pos, literal)
        } else {
            (&self.neg, literal - self.num_features)
        };
        half[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub(crate) fn positive_words(&self) -> &[u64] {
        &self.pos
    }

    #[inline]
    pub(crate) fn negated_words(&self) -> &[u64] {
        &self.neg
    }
}

/// Expands an input vector into its literal pool.
pub fn literals_of(input: &Hypervector, num_features: usize) -> Result<Literals> {
    if input.size() != num_features {
        return Err(Error::DimensionMismatch {
            expected: num_features,
            found: input.size(),
        });
    }
    let pos = input.words().to_vec();
    let n = words_for(num_features);
    let mut neg: Vec<u64> = pos.iter().map(|w| !w).collect();
    if n > 0 {
        neg[n - 1] &= tail_mask(num_features);
    }
    Ok(Literals {
        num_features,
        pos,
        neg,
    })
}
