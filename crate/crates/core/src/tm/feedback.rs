//! Type I and Type II feedback.
//!
//! Reward moves an automaton one state toward the pole of its current
//! action, penalty one state toward the opposite pole; both saturate at
//! `[1, 2N]`. Write `p_hi = (s - 1) / s` (or 1 when boosting true
//! positives) and `p_lo = 1 / s`. Per literal with value `x` in a clause
//! with output `c`:
//!
//! ```text
//! Type I   c=1 x=1  include: reward  w.p. p_hi   exclude: penalty w.p. p_hi
//!          c=1 x=0  include: (cannot happen)     exclude: reward  w.p. p_lo
//!          c=0 any  include: penalty w.p. p_lo   exclude: reward  w.p. p_lo
//! Type II  c=1 x=0  exclude: penalty w.p. 1      everything else: inaction
//! ```
//!
//! In direction terms Type I with `c = 1` steps true literals up with `p_hi`
//! and false literals down with `p_lo`; with `c = 0` it steps every literal
//! down with `p_lo`. Type II steps excluded false literals up.

use rand::RngCore;

use crate::rng::{bernoulli_mask, threshold};
use crate::tm::bank::ClauseBank;
use crate::tm::config::TMConfig;
use crate::tm::literals::Literals;

/// Precomputed Bernoulli thresholds for Type I.
#[derive(Clone, Copy, Debug)]
pub struct FeedbackProbabilities {
    pub(crate) up: Option<u32>,
    pub(crate) down: Option<u32>,
}

impl FeedbackProbabilities {
    pub fn new(specificity: f64, boost_true_positive: bool) -> Self {
        let p_hi = if boost_true_positive {
            1.0
        } else {
            (specificity - 1.0) / specificity
        };
        Self {
            up: threshold(p_hi),
            down: threshold(1.0 / specificity),
        }
    }

    pub fn from_config(c: &TMConfig) -> Self {
        Self::new(c.specificity, c.boost_true_positive)
    }
}

impl ClauseBank {
    /// Type I feedback on clause `j` given its (learning-mode) output.
    pub fn type_i_feedback<R: RngCore + ?Sized>(
        &mut self,
        j: usize,
        lits: &Literals,
        clause_output: bool,
        probs: &FeedbackProbabilities,
        rng: &mut R,
    ) {
        let layout = self.block();
        for half in 0..2 {
            let words = if half == 0 {
                lits.positive_words()
            } else {
                lits.negated_words()
            };
            for w in 0..layout.words {
                let valid = layout.valid(w);
                if clause_output {
                    let truth = words[w];
                    let up = truth & bernoulli_mask(rng, probs.up);
                    let down = !truth & valid & bernoulli_mask(rng, probs.down);
                    self.increment_block(j, half, w, up);
                    self.decrement_block(j, half, w, down);
                } else {
                    let down = valid & bernoulli_mask(rng, probs.down);
                    self.decrement_block(j, half, w, down);
                }
            }
        }
    }

    /// Type II feedback on clause `j`. Callers invoke it only when the clause
    /// fired; every excluded literal that is false steps toward include.
    pub fn type_ii_feedback(&mut self, j: usize, lits: &Literals) {
        let layout = self.block();
        for half in 0..2 {
            let words = if half == 0 {
                lits.positive_words()
            } else {
                lits.negated_words()
            };
            for w in 0..layout.words {
                let candidates = !words[w] & layout.valid(w) & !self.include_word(j, half, w);
                self.increment_block(j, half, w, candidates);
            }
        }
    }
}
