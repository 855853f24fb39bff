//! Clause banks: one class's worth of clauses and their automata.

use crate::error::{Error, Result};
use crate::hv::{tail_mask, words_for};
use crate::tm::literals::Literals;

/// How an empty clause (no included literals) evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Empty clauses output 0.
    Inference,
    /// Empty clauses output 1, so they can still receive feedback.
    Learning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// Odd clause indices vote for the class, even ones against.
    pub fn of_index(j: usize) -> Self {
        if j % 2 == 1 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// `n` clauses over `2D` literals. Each literal of each clause has one
/// automaton with state in `[1, 2N]`; the literal is included iff its state
/// exceeds `N`.
///
/// Alongside the byte states the bank keeps a packed include mask per clause
/// (positive half then negated half) and an include count, both updated on
/// every boundary crossing, so evaluation is pure word arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseBank {
    num_features: usize,
    num_clauses: usize,
    states_per_action: u8,
    words: usize,
    states: Vec<u8>,
    include: Vec<u64>,
    included: Vec<u32>,
}

impl ClauseBank {
    /// Fresh bank with every automaton at `N`, the weakest exclude.
    pub fn new(num_clauses: usize, num_features: usize, states_per_action: u8) -> Self {
        let words = words_for(num_features);
        Self {
            num_features,
            num_clauses,
            states_per_action,
            words,
            states: vec![states_per_action; num_clauses * 2 * num_features],
            include: vec![0; num_clauses * 2 * words],
            included: vec![0; num_clauses],
        }
    }

    /// Rebuilds a bank from raw states, validating their range.
    pub fn from_states(
        num_clauses: usize,
        num_features: usize,
        states_per_action: u8,
        states: Vec<u8>,
    ) -> Result<Self> {
        let expected = num_clauses * 2 * num_features;
        if states.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: states.len(),
            });
        }
        let max = 2 * states_per_action as u16;
        if let Some(bad) = states.iter().find(|&&s| s == 0 || s as u16 > max) {
            return Err(Error::Malformed(format!(
                "automaton state {bad} outside [1, {max}]"
            )));
        }
        let mut bank = Self::new(num_clauses, num_features, states_per_action);
        bank.states = states;
        for j in 0..num_clauses {
            bank.rebuild_masks(j);
        }
        Ok(bank)
    }

    pub fn num_clauses(&self) -> usize {
        self.num_clauses
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_literals(&self) -> usize {
        2 * self.num_features
    }

    pub fn states_per_action(&self) -> u8 {
        self.states_per_action
    }

    pub fn polarity(&self, j: usize) -> Polarity {
        Polarity::of_index(j)
    }

    /// All states, clause-major.
    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub fn clause_states(&self, j: usize) -> &[u8] {
        let l = self.num_literals();
        &self.states[j * l..(j + 1) * l]
    }

    pub fn state(&self, j: usize, literal: usize) -> u8 {
        self.states[j * self.num_literals() + literal]
    }

    pub fn is_included(&self, j: usize, literal: usize) -> bool {
        self.state(j, literal) > self.states_per_action
    }

    pub fn included_count(&self, j: usize) -> usize {
        self.included[j] as usize
    }

    /// Included literal indices of clause `j`, ascending, in `0..2D`.
    pub fn included_literals(&self, j: usize) -> Vec<usize> {
        let (pos, neg) = self.masks(j);
        let mut out = Vec::with_capacity(self.included[j] as usize);
        for (offset, half) in [(0, pos), (self.num_features, neg)] {
            for (wi, &w) in half.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    out.push(offset + wi * 64 + w.trailing_zeros() as usize);
                    w &= w - 1;
                }
            }
        }
        out
    }

    /// Overwrites one automaton. Intended for tests and hand-built models.
    pub fn set_state(&mut self, j: usize, literal: usize, state: u8) {
        assert!(
            state >= 1 && state as u16 <= 2 * self.states_per_action as u16,
            "state {state} out of range"
        );
        let idx = j * self.num_literals() + literal;
        let was = self.states[idx] > self.states_per_action;
        self.states[idx] = state;
        let now = state > self.states_per_action;
        if was != now {
            self.toggle_include(j, literal, now);
        }
    }

    #[inline]
    fn masks(&self, j: usize) -> (&[u64], &[u64]) {
        let base = j * 2 * self.words;
        let m = &self.include[base..base + 2 * self.words];
        m.split_at(self.words)
    }

    fn toggle_include(&mut self, j: usize, literal: usize, on: bool) {
        let (half, k) = if literal < self.num_features {
            (0, literal)
        } else {
            (1, literal - self.num_features)
        };
        let idx = j * 2 * self.words + half * self.words + k / 64;
        let bit = 1u64 << (k % 64);
        if on {
            self.include[idx] |= bit;
            self.included[j] += 1;
        } else {
            self.include[idx] &= !bit;
            self.included[j] -= 1;
        }
    }

    fn rebuild_masks(&mut self, j: usize) {
        let l = self.num_literals();
        let n = self.states_per_action;
        let base = j * 2 * self.words;
        self.include[base..base + 2 * self.words].fill(0);
        let mut count = 0;
        for lit in 0..l {
            if self.states[j * l + lit] > n {
                let (half, k) = if lit < self.num_features {
                    (0, lit)
                } else {
                    (1, lit - self.num_features)
                };
                self.include[base + half * self.words + k / 64] |= 1 << (k % 64);
                count += 1;
            }
        }
        self.included[j] = count;
    }

    /// Conjunction of the included literals of clause `j`.
    #[inline]
    pub fn clause_output(&self, j: usize, lits: &Literals, mode: EvalMode) -> bool {
        debug_assert_eq!(lits.num_features(), self.num_features);
        if self.included[j] == 0 {
            return mode == EvalMode::Learning;
        }
        let (inc_pos, inc_neg) = self.masks(j);
        let x = lits.positive_words();
        let nx = lits.negated_words();
        inc_pos
            .iter()
            .zip(inc_neg)
            .zip(x.iter().zip(nx))
            .all(|((ip, ineg), (xw, nxw))| (ip & !xw) | (ineg & !nxw) == 0)
    }

    /// Unclamped vote: firing positive clauses minus firing negative ones.
    pub fn raw_class_sum(&self, lits: &Literals, mode: EvalMode) -> i64 {
        (0..self.num_clauses)
            .filter(|&j| self.clause_output(j, lits, mode))
            .map(|j| self.polarity(j).sign())
            .sum()
    }

    /// Vote clamped to `[-T, T]`.
    pub fn class_sum(&self, lits: &Literals, threshold: u32, mode: EvalMode) -> i64 {
        clamp_vote(self.raw_class_sum(lits, mode), threshold)
    }

    // Feedback primitives used by `feedback.rs`. Both operate on one 64-literal
    // block of one half and keep masks and counts in sync.

    #[inline]
    pub(crate) fn block(&self) -> BlockLayout {
        BlockLayout {
            words: self.words,
            tail: tail_mask(self.num_features),
        }
    }

    /// Moves every literal flagged in `mask` one state toward include.
    #[inline]
    pub(crate) fn increment_block(&mut self, j: usize, half: usize, w: usize, mut mask: u64) {
        let l = self.num_literals();
        let n = self.states_per_action;
        let max = 2 * n;
        let base = j * l + half * self.num_features + w * 64;
        let inc_idx = j * 2 * self.words + half * self.words + w;
        while mask != 0 {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let s = &mut self.states[base + b];
            if *s < max {
                *s += 1;
                if *s == n + 1 {
                    self.include[inc_idx] |= 1 << b;
                    self.included[j] += 1;
                }
            }
        }
    }

    /// Moves every literal flagged in `mask` one state toward exclude.
    #[inline]
    pub(crate) fn decrement_block(&mut self, j: usize, half: usize, w: usize, mut mask: u64) {
        let l = self.num_literals();
        let n = self.states_per_action;
        let base = j * l + half * self.num_features + w * 64;
        let inc_idx = j * 2 * self.words + half * self.words + w;
        if mask == u64::MAX && self.include[inc_idx] == 0 {
            // Whole block excluded: plain saturating decrement, no crossings.
            for s in &mut self.states[base..base + 64] {
                *s = (*s).max(2) - 1;
            }
            return;
        }
        while mask != 0 {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let s = &mut self.states[base + b];
            if *s > 1 {
                *s -= 1;
                if *s == n {
                    self.include[inc_idx] &= !(1 << b);
                    self.included[j] -= 1;
                }
            }
        }
    }

    #[inline]
    pub(crate) fn include_word(&self, j: usize, half: usize, w: usize) -> u64 {
        self.include[j * 2 * self.words + half * self.words + w]
    }
}

#[derive(Clone, Copy)]
pub(crate) struct BlockLayout {
    pub words: usize,
    pub tail: u64,
}

impl BlockLayout {
    #[inline]
    pub fn valid(&self, w: usize) -> u64 {
        if w + 1 == self.words {
            self.tail
        } else {
            u64::MAX
        }
    }
}

#[inline]
pub fn clamp_vote(v: i64, threshold: u32) -> i64 {
    let t = threshold as i64;
    v.clamp(-t, t)
}
