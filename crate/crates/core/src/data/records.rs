//! Per-run learning curves and the sweep tables built from them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tm::Metrics;

pub const LONG_HEADER: [&str; 8] = [
    "hv_size",
    "nbits",
    "ensemble",
    "epoch",
    "accuracy",
    "balanced_accuracy",
    "seed",
    "clauses",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "hv_size",
    "nbits",
    "clauses",
    "n_runs",
    "max_accuracy_mean",
    "max_accuracy_sd",
    "max_balanced_accuracy_mean",
    "max_balanced_accuracy_sd",
    "final_accuracy_mean",
    "final_accuracy_sd",
    "final_balanced_accuracy_mean",
    "final_balanced_accuracy_sd",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: u64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub wall_time_s: f64,
}

/// One ensemble replica's learning curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: serde_json::Value,
    pub hv_size: usize,
    /// `None` for raw-feature runs.
    pub nbits: Option<usize>,
    pub clauses: usize,
    pub ensemble: usize,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub final_metrics: Option<Metrics>,
}

impl RunRecord {
    pub fn max_accuracy(&self) -> Option<f64> {
        self.epochs.iter().map(|e| e.accuracy).reduce(f64::max)
    }

    pub fn max_balanced_accuracy(&self) -> Option<f64> {
        self.epochs.iter().map(|e| e.balanced_accuracy).reduce(f64::max)
    }

    pub fn final_epoch(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    /// Epochs strictly increasing and all metrics in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        if self.epochs.windows(2).any(|w| w[0].epoch >= w[1].epoch) {
            return Err(Error::Invariant("epochs are not strictly increasing".into()));
        }
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if self
            .epochs
            .iter()
            .any(|e| !in_unit(e.accuracy) || !in_unit(e.balanced_accuracy))
        {
            return Err(Error::Invariant("metric outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Mean and sample (n - 1) standard deviation. The sd is NaN below two
/// values; both are NaN for none.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Fixed formatting with 6 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    if !(0..=17).contains(&decimals) {
        return format!("{x:.5e}");
    }
    let s = format!("{x:.*}", decimals as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Cell key: `(hv_size, nbits, clauses)`.
pub type CellKey = (usize, Option<usize>, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub n_runs: usize,
    pub max_accuracy: (f64, f64),
    pub max_balanced_accuracy: (f64, f64),
    pub final_accuracy: (f64, f64),
    pub final_balanced_accuracy: (f64, f64),
}

/// Mean and sd per cell over runs that recorded at least one epoch.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.epochs.is_empty()) {
        cells.entry((r.hv_size, r.nbits, r.clauses)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|(key, runs)| {
            let col = |f: &dyn Fn(&RunRecord) -> f64| {
                mean_sd(&runs.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            CellSummary {
                key,
                n_runs: runs.len(),
                max_accuracy: col(&|r| r.max_accuracy().unwrap()),
                max_balanced_accuracy: col(&|r| r.max_balanced_accuracy().unwrap()),
                final_accuracy: col(&|r| r.final_epoch().unwrap().accuracy),
                final_balanced_accuracy: col(&|r| r.final_epoch().unwrap().balanced_accuracy),
            }
        })
        .collect()
}

fn opt(n: Option<usize>) -> String {
    n.map_or_else(String::new, |v| v.to_string())
}

/// Long-format rows, one per (run, epoch), in record order.
pub fn long_table_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LONG_HEADER).map_err(csv_err)?;
    for r in records {
        for e in &r.epochs {
            w.write_record([
                r.hv_size.to_string(),
                opt(r.nbits),
                r.ensemble.to_string(),
                e.epoch.to_string(),
                fmt_sig(e.accuracy),
                fmt_sig(e.balanced_accuracy),
                r.seed.to_string(),
                r.clauses.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

pub fn summary_table_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for c in summarize(records) {
        let mut row = vec![
            c.key.0.to_string(),
            opt(c.key.1),
            c.key.2.to_string(),
            c.n_runs.to_string(),
        ];
        for (m, s) in [
            c.max_accuracy,
            c.max_balanced_accuracy,
            c.final_accuracy,
            c.final_balanced_accuracy,
        ] {
            row.push(fmt_sig(m));
            row.push(fmt_sig(s));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

/// Writes the long table to `long_path` and the per-cell summary to
/// `summary_path`.
pub fn write_sweep_table(
    records: &[RunRecord],
    long_path: impl AsRef<Path>,
    summary_path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(long_path, long_table_csv(records)?)?;
    std::fs::write(summary_path, summary_table_csv(records)?)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Malformed(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Malformed(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(hv: usize, nbits: usize, ensemble: usize, accs: &[f64]) -> RunRecord {
        RunRecord {
            config: serde_json::Value::Null,
            hv_size: hv,
            nbits: Some(nbits),
            clauses: 10,
            ensemble,
            seed: 7,
            epochs: accs
                .iter()
                .enumerate()
                .map(|(i, &a)| EpochRecord {
                    epoch: i as u64 + 1,
                    accuracy: a,
                    balanced_accuracy: a,
                    wall_time_s: 0.5,
                })
                .collect(),
            final_metrics: None,
        }
    }

    #[test]
    fn grid_rows() {
        let rs: Vec<_> = [(1024, 4), (1024, 8), (2048, 4), (2048, 8)]
            .iter()
            .map(|&(d, n)| rec(d, n, 0, &[0.5]))
            .collect();
        let csv = long_table_csv(&rs).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(
            csv.lines().next().unwrap(),
            "hv_size,nbits,ensemble,epoch,accuracy,balanced_accuracy,seed,clauses"
        );
        assert_eq!(summarize(&rs).len(), 4);
    }

    #[test]
    fn empty_records_header_only() {
        assert_eq!(long_table_csv(&[]).unwrap().lines().count(), 1);
        assert_eq!(summary_table_csv(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[0.9, 0.7]);
        assert!((m - 0.8).abs() < 1e-15);
        assert!((s - 0.02f64.sqrt()).abs() < 1e-15);
        let rs = vec![rec(8, 1, 0, &[0.3, 0.9, 0.8]), rec(8, 1, 1, &[0.7, 0.6])];
        let c = &summarize(&rs)[0];
        assert!((c.max_accuracy.0 - 0.8).abs() < 1e-12);
        assert!((c.final_accuracy.0 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.8), "0.8");
        assert_eq!(fmt_sig(0.141421356), "0.141421");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(0.00012345678), "0.000123457");
    }

    #[test]
    fn validate_curves() {
        assert!(rec(8, 1, 0, &[0.1, 0.2]).validate().is_ok());
        let mut r = rec(8, 1, 0, &[0.1, 0.2]);
        r.epochs[1].epoch = 1;
        assert!(r.validate().is_err());
        assert!(rec(8, 1, 0, &[1.5]).validate().is_err());
    }
}
