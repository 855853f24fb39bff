//! Binary and multiclass Tsetlin Machines.

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::rng::{derive_stream, draw, threshold, StreamRng};
use crate::tm::bank::{clamp_vote, ClauseBank, EvalMode, Polarity};
use crate::tm::config::TMConfig;
use crate::tm::feedback::FeedbackProbabilities;
use crate::tm::literals::{literals_of, Literals};
use crate::tm::metrics::Metrics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    /// One bank; output is the unit step of its vote.
    Binary,
    /// One bank per class; output is the argmax of the votes.
    Multiclass,
}

/// A labelled, already encoded sample.
pub type Sample = (Hypervector, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct TsetlinMachine {
    config: TMConfig,
    kind: MachineKind,
    banks: Vec<ClauseBank>,
    epochs_trained: u64,
}

/// Unit step with `u(0) = 1`.
#[inline]
pub fn unit_step(v: i64) -> bool {
    v >= 0
}

/// Index of the largest vote; the lowest class id wins ties.
pub fn argmax(sums: &[i64]) -> usize {
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate().skip(1) {
        if s > sums[best] {
            best = i;
        }
    }
    best
}

impl TsetlinMachine {
    pub fn new_binary(config: TMConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self::with_banks(config, MachineKind::Binary, 1))
    }

    pub fn new_multiclass(config: TMConfig, num_classes: usize) -> Result<Self> {
        config.validate()?;
        if num_classes < 2 {
            return Err(Error::config(
                "num_classes",
                format!("a multiclass machine needs at least 2 classes, got {num_classes}"),
            ));
        }
        Ok(Self::with_banks(config, MachineKind::Multiclass, num_classes))
    }

    fn with_banks(config: TMConfig, kind: MachineKind, n: usize) -> Self {
        let banks = (0..n)
            .map(|_| {
                ClauseBank::new(
                    config.clauses_per_class,
                    config.num_features,
                    config.states_per_action,
                )
            })
            .collect();
        Self {
            config,
            kind,
            banks,
            epochs_trained: 0,
        }
    }

    /// Reassembles a machine from persisted parts.
    pub fn from_parts(
        config: TMConfig,
        kind: MachineKind,
        banks: Vec<ClauseBank>,
        epochs_trained: u64,
    ) -> Result<Self> {
        config.validate()?;
        let expected_banks = match kind {
            MachineKind::Binary => 1,
            MachineKind::Multiclass => banks.len().max(2),
        };
        if banks.len() != expected_banks {
            return Err(Error::Malformed(format!(
                "{kind:?} machine with {} banks",
                banks.len()
            )));
        }
        for b in &banks {
            if b.num_clauses() != config.clauses_per_class
                || b.num_features() != config.num_features
                || b.states_per_action() != config.states_per_action
            {
                return Err(Error::Malformed(
                    "bank shape does not match configuration".into(),
                ));
            }
        }
        Ok(Self {
            config,
            kind,
            banks,
            epochs_trained,
        })
    }

    pub fn config(&self) -> &TMConfig {
        &self.config
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn banks(&self) -> &[ClauseBank] {
        &self.banks
    }

    pub fn banks_mut(&mut self) -> &mut [ClauseBank] {
        &mut self.banks
    }

    pub fn epochs_trained(&self) -> u64 {
        self.epochs_trained
    }

    /// Number of output classes (2 for a binary machine).
    pub fn num_classes(&self) -> usize {
        match self.kind {
            MachineKind::Binary => 2,
            MachineKind::Multiclass => self.banks.len(),
        }
    }

    pub fn literals(&self, input: &Hypervector) -> Result<Literals> {
        literals_of(input, self.config.num_features)
    }

    /// Clamped votes per bank.
    pub fn class_sums(&self, input: &Hypervector) -> Result<Vec<i64>> {
        let lits = self.literals(input)?;
        Ok(self.class_sums_for(&lits))
    }

    fn class_sums_for(&self, lits: &Literals) -> Vec<i64> {
        self.banks
            .iter()
            .map(|b| b.class_sum(lits, self.config.threshold, EvalMode::Inference))
            .collect()
    }

    /// `u(vote)` of the single bank.
    pub fn predict_binary(&self, input: &Hypervector) -> Result<bool> {
        if self.kind != MachineKind::Binary {
            return Err(Error::config("kind", "predict_binary needs a binary machine"));
        }
        Ok(unit_step(self.class_sums(input)?[0]))
    }

    /// Argmax over class votes, lowest id on ties.
    pub fn predict_multiclass(&self, input: &Hypervector) -> Result<usize> {
        if self.kind != MachineKind::Multiclass {
            return Err(Error::config(
                "kind",
                "predict_multiclass needs a multiclass machine",
            ));
        }
        Ok(argmax(&self.class_sums(input)?))
    }

    /// Class id for either kind of machine.
    pub fn predict(&self, input: &Hypervector) -> Result<usize> {
        let sums = self.class_sums(input)?;
        Ok(match self.kind {
            MachineKind::Binary => unit_step(sums[0]) as usize,
            MachineKind::Multiclass => argmax(&sums),
        })
    }

    pub fn predict_all(&self, inputs: &[Sample]) -> Result<Vec<usize>> {
        inputs.par_iter().map(|(x, _)| self.predict(x)).collect()
    }

    pub fn evaluate(&self, data: &[Sample]) -> Result<Metrics> {
        if data.is_empty() {
            return Err(Error::EmptyInput("evaluate"));
        }
        let predicted = self.predict_all(data)?;
        let truth: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
        Metrics::from_predictions(&truth, &predicted, self.num_classes())
    }

    fn check_labels(&self, data: &[Sample]) -> Result<()> {
        let k = self.num_classes();
        for (x, y) in data {
            if x.size() != self.config.num_features {
                return Err(Error::DimensionMismatch {
                    expected: self.config.num_features,
                    found: x.size(),
                });
            }
            if *y >= k {
                return Err(Error::Malformed(format!(
                    "label {y} out of range for {k} classes"
                )));
            }
        }
        Ok(())
    }

    /// One pass over `data` in a seeded shuffled order.
    ///
    /// Each sample reinforces its own class bank and suppresses one other
    /// class drawn uniformly from the classes present in `data`; with a
    /// single class present only the target bank is updated.
    ///
    /// Streams are derived from `(seed, epoch index)`, with one stream per
    /// bank for clause selection and feedback and a separate one for the
    /// sample order and negative-class draws. Training is therefore
    /// bit-reproducible and can be resumed from a persisted machine.
    pub fn fit_epoch(&mut self, data: &[Sample]) -> Result<()> {
        if data.is_empty() {
            warn!("fit_epoch called with an empty dataset; nothing to do");
            return Ok(());
        }
        self.check_labels(data)?;
        let epoch = self.epochs_trained.to_le_bytes();
        let seed = self.config.seed;
        let mut order_rng = derive_stream(seed, &[b"order", &epoch]);
        let mut bank_rngs: Vec<StreamRng> = (0..self.banks.len() as u64)
            .map(|b| derive_stream(seed, &[b"bank", &b.to_le_bytes(), &epoch]))
            .collect();

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut order_rng);

        let mut present: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
        present.sort_unstable();
        present.dedup();

        let probs = FeedbackProbabilities::from_config(&self.config);
        let t = self.config.threshold;
        let mut outputs = vec![false; self.config.clauses_per_class];

        for &i in &order {
            let (x, y) = &data[i];
            let lits = literals_of(x, self.config.num_features)?;
            match self.kind {
                MachineKind::Binary => {
                    update_bank(
                        &mut self.banks[0],
                        &lits,
                        *y == 1,
                        t,
                        &probs,
                        &mut bank_rngs[0],
                        &mut outputs,
                    );
                }
                MachineKind::Multiclass => {
                    update_bank(
                        &mut self.banks[*y],
                        &lits,
                        true,
                        t,
                        &probs,
                        &mut bank_rngs[*y],
                        &mut outputs,
                    );
                    if present.len() < 2 {
                        continue;
                    }
                    // Uniform over present classes other than y.
                    let pos = present.binary_search(y).expect("label is present");
                    let mut pick = order_rng.random_range(0..present.len() - 1);
                    if pick >= pos {
                        pick += 1;
                    }
                    let other = present[pick];
                    update_bank(
                        &mut self.banks[other],
                        &lits,
                        false,
                        t,
                        &probs,
                        &mut bank_rngs[other],
                        &mut outputs,
                    );
                }
            }
        }
        self.epochs_trained += 1;
        Ok(())
    }

    pub fn fit(&mut self, data: &[Sample], epochs: usize) -> Result<()> {
        for _ in 0..epochs {
            self.fit_epoch(data)?;
        }
        Ok(())
    }
}

/// Probability that a clause of a bank receives feedback for one sample:
/// `(T - v) / 2T` when the bank is the target, `(T + v) / 2T` otherwise,
/// with `v` already clamped.
pub fn update_probability(clamped_vote: i64, threshold: u32, is_target: bool) -> f64 {
    let t = threshold as f64;
    let v = clamped_vote as f64;
    if is_target {
        (t - v) / (2.0 * t)
    } else {
        (t + v) / (2.0 * t)
    }
}

fn update_bank<R: RngCore>(
    bank: &mut ClauseBank,
    lits: &Literals,
    is_target: bool,
    threshold_t: u32,
    probs: &FeedbackProbabilities,
    rng: &mut R,
    outputs: &mut [bool],
) {
    let mut vote = 0i64;
    for (j, out) in outputs.iter_mut().enumerate() {
        *out = bank.clause_output(j, lits, EvalMode::Learning);
        if *out {
            vote += bank.polarity(j).sign();
        }
    }
    let v = clamp_vote(vote, threshold_t);
    let p = threshold(update_probability(v, threshold_t, is_target));
    for (j, &out) in outputs.iter().enumerate() {
        if !draw(rng, p) {
            continue;
        }
        let reinforce = (bank.polarity(j) == Polarity::Positive) == is_target;
        if reinforce {
            bank.type_i_feedback(j, lits, out, probs, rng);
        } else if out {
            bank.type_ii_feedback(j, lits);
        }
    }
}
