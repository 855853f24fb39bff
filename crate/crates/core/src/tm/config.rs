use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default automaton depth per action; `2N = 254` keeps a state in one byte.
pub const DEFAULT_STATES_PER_ACTION: u8 = 127;

/// Hyperparameters of a Tsetlin Machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TMConfig {
    /// Clauses per class bank, `n`. Must be even: half vote for, half against.
    pub clauses_per_class: usize,
    /// Vote clamp and feedback scale, `T`.
    pub threshold: u32,
    /// Specificity `s >= 1`. `s = 1` is the reasoning-by-elimination regime.
    pub specificity: f64,
    /// Automaton states per action, `N`. States live in `[1, 2N]`.
    pub states_per_action: u8,
    /// Reward true literals of firing clauses with probability 1 instead of
    /// `(s - 1) / s`.
    pub boost_true_positive: bool,
    pub seed: u64,
    /// Input width `D`; a clause sees `2D` literals.
    pub num_features: usize,
}

impl TMConfig {
    /// Config with defaults for the remaining fields. Boosting is switched on
    /// exactly when `s == 1`, since without it nothing ever pushes a literal
    /// toward inclusion in that regime.
    pub fn new(num_features: usize, clauses_per_class: usize, threshold: u32, specificity: f64) -> Self {
        Self {
            clauses_per_class,
            threshold,
            specificity,
            states_per_action: DEFAULT_STATES_PER_ACTION,
            boost_true_positive: specificity == 1.0,
            seed: 0,
            num_features,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_boost(mut self, boost: bool) -> Self {
        self.boost_true_positive = boost;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.clauses_per_class == 0 || self.clauses_per_class % 2 != 0 {
            return Err(Error::config(
                "clauses_per_class",
                format!("must be even and positive, got {}", self.clauses_per_class),
            ));
        }
        if self.threshold == 0 {
            return Err(Error::config("threshold", "must be at least 1"));
        }
        if !(self.specificity >= 1.0) || !self.specificity.is_finite() {
            return Err(Error::config(
                "specificity",
                format!("must be a finite value >= 1, got {}", self.specificity),
            ));
        }
        if self.states_per_action == 0 || self.states_per_action > 127 {
            return Err(Error::config(
                "states_per_action",
                format!("must be in 1..=127, got {}", self.states_per_action),
            ));
        }
        if self.num_features == 0 {
            return Err(Error::config("num_features", "must be positive"));
        }
        Ok(())
    }

    /// Number of literals per clause.
    pub fn num_literals(&self) -> usize {
        2 * self.num_features
    }
}
