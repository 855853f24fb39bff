use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy and balanced accuracy of a prediction set.
///
/// Balanced accuracy is the mean of per-class recalls over all `num_classes`
/// classes. A class with no examples contributes a recall of 0 and is listed
/// in `classes_without_examples`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub per_class_recall: Vec<f64>,
    pub classes_without_examples: Vec<usize>,
    pub n_samples: usize,
}

impl Metrics {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::EmptyInput("metrics"));
        }
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        let mut support = vec![0usize; num_classes];
        let mut hits = vec![0usize; num_classes];
        let mut correct = 0usize;
        for (&y, &p) in truth.iter().zip(predicted) {
            if y >= num_classes {
                return Err(Error::Malformed(format!(
                    "label {y} out of range for {num_classes} classes"
                )));
            }
            support[y] += 1;
            if y == p {
                hits[y] += 1;
                correct += 1;
            }
        }
        let per_class_recall: Vec<f64> = support
            .iter()
            .zip(&hits)
            .map(|(&s, &h)| if s == 0 { 0.0 } else { h as f64 / s as f64 })
            .collect();
        let classes_without_examples = support
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            accuracy: correct as f64 / truth.len() as f64,
            balanced_accuracy: per_class_recall.iter().sum::<f64>() / num_classes as f64,
            per_class_recall,
            classes_without_examples,
            n_samples: truth.len(),
        })
    }
}
