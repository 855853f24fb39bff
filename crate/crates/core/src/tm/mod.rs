//! Tsetlin Machine learner over Boolean feature vectors.

mod bank;
mod config;
mod feedback;
mod literals;
mod machine;
mod metrics;

pub use bank::{clamp_vote, ClauseBank, EvalMode, Polarity};
pub use config::{TMConfig, DEFAULT_STATES_PER_ACTION};
pub use feedback::FeedbackProbabilities;
pub use literals::{literals_of, Literals};
pub use machine::{argmax, unit_step, update_probability, MachineKind, Sample, TsetlinMachine};
pub use metrics::Metrics;
