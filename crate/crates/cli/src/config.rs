//! Config files and flag overrides.

use std::path::{Path, PathBuf};

use hvtm::data::LabelPolicy;
use hvtm::experiment::{DatasetConfig, Representation, RunConfig, SweepAxes};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::output::CliError;
use crate::{AxisFlags, DatasetKind, LabelsArg, ReprArg, RunFlags};

/// Reads JSON or TOML (by extension). A manifest's `config` member is
/// unwrapped, so a previous run's manifest can be passed back in.
pub fn read_config_value(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "toml") {
        let t: toml::Value = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t)?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    };
    match value {
        Value::Object(ref m) if m.contains_key("command") && m.contains_key("config") => {
            Ok(m["config"].clone())
        }
        v => Ok(v),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::usage(format!("invalid {what}: {e}")))
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    p.clone()
        .ok_or_else(|| CliError::usage(format!("`--{flag}` is required for this dataset")))
}

fn policy(l: LabelsArg) -> LabelPolicy {
    match l {
        LabelsArg::None => LabelPolicy::default(),
        LabelsArg::Hiv => LabelPolicy::hiv(),
        LabelsArg::TrecCoarse => LabelPolicy::trec_coarse(),
    }
}

fn apply_dataset(cfg: &mut RunConfig, f: &RunFlags) -> Result<(), CliError> {
    if let Some(kind) = f.dataset {
        let labels = f.labels.map(policy).unwrap_or_default();
        let length = f
            .fingerprint_length
            .unwrap_or(hvtm::encoders::DEFAULT_FINGERPRINT_LENGTH);
        cfg.dataset = match kind {
            DatasetKind::Xor => DatasetConfig::Xor,
            DatasetKind::Mnist => DatasetConfig::Mnist {
                dir: required(&f.data_dir, "data-dir")?,
            },
            DatasetKind::Text => DatasetConfig::Text {
                train: required(&f.train, "train")?,
                test: required(&f.test, "test")?,
                labels,
            },
            DatasetKind::Fingerprint => DatasetConfig::Fingerprint {
                train: required(&f.train, "train")?,
                test: required(&f.test, "test")?,
                length,
                labels,
            },
        };
        return Ok(());
    }
    match &mut cfg.dataset {
        DatasetConfig::Xor => {}
        DatasetConfig::Mnist { dir } => {
            if let Some(d) = &f.data_dir {
                *dir = d.clone();
            }
        }
        DatasetConfig::Text { train, test, labels } => {
            if let Some(p) = &f.train {
                *train = p.clone();
            }
            if let Some(p) = &f.test {
                *test = p.clone();
            }
            if let Some(l) = f.labels {
                *labels = policy(l);
            }
        }
        DatasetConfig::Fingerprint {
            train,
            test,
            length,
            labels,
        } => {
            if let Some(p) = &f.train {
                *train = p.clone();
            }
            if let Some(p) = &f.test {
                *test = p.clone();
            }
            if let Some(n) = f.fingerprint_length {
                *length = n;
            }
            if let Some(l) = f.labels {
                *labels = policy(l);
            }
        }
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, f: &RunFlags) -> Result<(), CliError> {
    apply_dataset(cfg, f)?;
    macro_rules! set {
        ($flag:ident => $field:expr) => {
            if let Some(v) = f.$flag {
                $field = v;
            }
        };
    }
    set!(seed => cfg.seed);
    set!(hv_size => cfg.hv_size);
    set!(nbits => cfg.nbits);
    set!(ensembles => cfg.ensembles);
    set!(workers => cfg.workers);
    set!(stride => cfg.image.stride);
    set!(binarize_threshold => cfg.image.binarize_threshold);
    set!(position_binding => cfg.image.position_binding);
    set!(skip_empty_patches => cfg.image.skip_empty_patches);
    if let Some(p) = f.patch_size {
        cfg.image.patch_height = p;
        cfg.image.patch_width = p;
    }
    if let Some(r) = f.representation {
        cfg.representation = match r {
            ReprArg::Vanilla => Representation::Vanilla,
            ReprArg::Hypervector => Representation::Hypervector,
        };
    }
    if f.clauses.is_some() {
        cfg.clauses_per_class = f.clauses;
    }
    if f.threshold.is_some() {
        cfg.threshold = f.threshold;
    }
    if f.specificity.is_some() {
        cfg.specificity = f.specificity;
    }
    if f.boost.is_some() {
        cfg.boost_true_positive = f.boost;
    }
    if f.epochs.is_some() {
        cfg.epochs = f.epochs;
    }
    if f.train_per_class.is_some() {
        cfg.train_per_class = f.train_per_class;
    }
    if f.test_per_class.is_some() {
        cfg.test_per_class = f.test_per_class;
    }
    Ok(())
}

pub fn run_config(f: &RunFlags) -> Result<RunConfig, CliError> {
    let mut cfg = match &f.config {
        Some(p) => parse(read_config_value(p)?, "run configuration")?,
        None => RunConfig::default(),
    };
    apply_flags(&mut cfg, f)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Base run plus axis lists. A config file may hold either this shape or a
/// bare run configuration.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub run: RunConfig,
    #[serde(default)]
    pub axes: SweepAxes,
}

pub fn sweep_config(f: &RunFlags, a: &AxisFlags) -> Result<SweepConfig, CliError> {
    let mut sc = match &f.config {
        Some(p) => {
            let v = read_config_value(p)?;
            if v.get("run").is_some() {
                parse(v, "sweep configuration")?
            } else {
                SweepConfig {
                    run: parse(v, "run configuration")?,
                    axes: SweepAxes::default(),
                }
            }
        }
        None => SweepConfig::default(),
    };
    apply_flags(&mut sc.run, f)?;
    if !a.hv_sizes.is_empty() {
        sc.axes.hv_sizes = a.hv_sizes.clone();
    }
    if !a.nbits_axis.is_empty() {
        sc.axes.nbits = a.nbits_axis.clone();
    }
    if !a.clauses_axis.is_empty() {
        sc.axes.clauses = a.clauses_axis.clone();
    }
    for cell in hvtm::experiment::sweep_cells(&sc.run, &sc.axes) {
        cell.validate()?;
    }
    Ok(sc)
}
