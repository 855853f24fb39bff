//! End-to-end runs: load, subset, encode, train replicas, record curves.
//!
//! Every random choice in a run is derived from the master seed. The data
//! subset depends only on the master seed, so all replicas and all sweep
//! cells see the same samples. Each replica `e` derives its own seed, from
//! which its codebooks and its machine's streams are derived in turn.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    load_idx, load_tsv, Dataset, EpochRecord, GrayImage, LabelPolicy, Manifest, Model, RunRecord,
    SubsetSpec, TsvPayload, TsvSchema,
};
use crate::encoders::{
    binarize, encode_vanilla, tokenize, BagOfWords, Encoder, FingerprintEncoder, ImageEncoder, ImageEncoderSpec,
    TextEncoder,
};
use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::rng::derive_seed;
use crate::tm::{Metrics, Sample, TMConfig, TsetlinMachine, DEFAULT_STATES_PER_ACTION};

pub const MNIST_TRAIN_IMAGES: &str = "train-images-idx3-ubyte.gz";
pub const MNIST_TRAIN_LABELS: &str = "train-labels-idx1-ubyte.gz";
pub const MNIST_TEST_IMAGES: &str = "t10k-images-idx3-ubyte.gz";
pub const MNIST_TEST_LABELS: &str = "t10k-labels-idx1-ubyte.gz";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// The 4-row XOR truth table, used for both training and testing.
    Xor,
    /// A directory holding the four gzipped IDX files under their standard
    /// names.
    Mnist { dir: PathBuf },
    /// `label<TAB>text` files.
    Text {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        labels: LabelPolicy,
    },
    /// `label<TAB>hex bits` files.
    Fingerprint {
        train: PathBuf,
        test: PathBuf,
        #[serde(default = "default_fingerprint_length")]
        length: usize,
        #[serde(default)]
        labels: LabelPolicy,
    },
}

fn default_fingerprint_length() -> usize {
    crate::encoders::DEFAULT_FINGERPRINT_LENGTH
}

impl DatasetConfig {
    pub fn input_paths(&self) -> Vec<PathBuf> {
        match self {
            DatasetConfig::Xor => Vec::new(),
            DatasetConfig::Mnist { dir } => [
                MNIST_TRAIN_IMAGES,
                MNIST_TRAIN_LABELS,
                MNIST_TEST_IMAGES,
                MNIST_TEST_LABELS,
            ]
            .iter()
            .map(|f| dir.join(f))
            .collect(),
            DatasetConfig::Text { train, test, .. } | DatasetConfig::Fingerprint { train, test, .. } => {
                vec![train.clone(), test.clone()]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Raw Booleanized features.
    Vanilla,
    /// Sparse hypervector encoding.
    Hypervector,
}

/// Image encoder options other than D, NBits and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageOptions {
    pub patch_height: usize,
    pub patch_width: usize,
    pub stride: usize,
    pub binarize_threshold: u8,
    pub position_binding: bool,
    pub skip_empty_patches: bool,
}

impl Default for ImageOptions {
    fn default() -> Self {
        let s = ImageEncoderSpec::new(1, 1, 0);
        Self {
            patch_height: s.patch_height,
            patch_width: s.patch_width,
            stride: s.stride,
            binarize_threshold: s.binarize_threshold,
            position_binding: s.position_binding,
            skip_empty_patches: s.skip_empty_patches,
        }
    }
}

/// A complete, serializable description of a run. Unset learner fields take
/// dataset-dependent defaults (see [`RunConfig::resolved`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub representation: Representation,
    pub hv_size: usize,
    pub nbits: usize,
    pub image: ImageOptions,
    /// Words kept for raw-feature text runs, most frequent first.
    pub vanilla_vocabulary: usize,
    pub train_per_class: Option<usize>,
    pub test_per_class: Option<usize>,
    pub clauses_per_class: Option<usize>,
    pub threshold: Option<u32>,
    pub specificity: Option<f64>,
    pub boost_true_positive: Option<bool>,
    pub states_per_action: u8,
    pub epochs: Option<usize>,
    pub ensembles: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::Xor,
            representation: Representation::Hypervector,
            hv_size: 2048,
            nbits: 4,
            image: ImageOptions::default(),
            vanilla_vocabulary: 5000,
            train_per_class: None,
            test_per_class: None,
            clauses_per_class: None,
            threshold: None,
            specificity: None,
            boost_true_positive: None,
            states_per_action: DEFAULT_STATES_PER_ACTION,
            epochs: None,
            ensembles: 1,
            seed: 0,
            workers: 0,
        }
    }
}

/// Learner settings after defaults are filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub clauses_per_class: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub boost_true_positive: bool,
    pub epochs: usize,
}

impl RunConfig {
    /// XOR defaults to `n=10, T=5, s=3` for 200 epochs; everything else to
    /// `n=100, T=15, s=5` for 30 epochs. Boosting defaults to on iff `s=1`.
    pub fn resolved(&self) -> Resolved {
        let (n, t, s, e) = match self.dataset {
            DatasetConfig::Xor => (10, 5, 3.0, 200),
            _ => (100, 15, 5.0, 30),
        };
        let specificity = self.specificity.unwrap_or(s);
        Resolved {
            clauses_per_class: self.clauses_per_class.unwrap_or(n),
            threshold: self.threshold.unwrap_or(t),
            specificity,
            boost_true_positive: self.boost_true_positive.unwrap_or(specificity == 1.0),
            epochs: self.epochs.unwrap_or(e),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensembles == 0 {
            return Err(Error::config("ensembles", "must be at least 1"));
        }
        if self.representation == Representation::Hypervector {
            if self.hv_size == 0 {
                return Err(Error::config("hv_size", "must be positive"));
            }
            if self.nbits == 0 || self.nbits > self.hv_size {
                return Err(Error::config(
                    "nbits",
                    format!("must be in 1..={}, got {}", self.hv_size, self.nbits),
                ));
            }
        }
        if let DatasetConfig::Fingerprint { length, .. } = self.dataset {
            if length == 0 || length % 4 != 0 {
                return Err(Error::config("length", "fingerprint length must be a positive multiple of 4"));
            }
        }
        for p in self.dataset.input_paths() {
            if !p.exists() {
                return Err(Error::config("dataset", format!("{} does not exist", p.display())));
            }
        }
        let r = self.resolved();
        TMConfig {
            clauses_per_class: r.clauses_per_class,
            threshold: r.threshold,
            specificity: r.specificity,
            states_per_action: self.states_per_action,
            boost_true_positive: r.boost_true_positive,
            seed: 0,
            num_features: 1,
        }
        .validate()
    }

    pub fn replica_seed(&self, ensemble: usize) -> u64 {
        derive_seed(self.seed, "replica", ensemble as u64)
    }

    /// Seed for replica `ensemble`'s codebooks.
    pub fn encoder_seed(&self, ensemble: usize) -> u64 {
        derive_seed(self.replica_seed(ensemble), "encoder", 0)
    }

}

/// Raw samples of both splits with a shared class list.
#[derive(Clone, Debug)]
pub enum RawSplits {
    Xor,
    Images {
        train: Dataset<GrayImage>,
        test: Dataset<GrayImage>,
    },
    Tsv {
        train: Dataset<TsvPayload>,
        test: Dataset<TsvPayload>,
    },
}

#[derive(Clone, Debug)]
pub struct PreparedData {
    pub splits: RawSplits,
    pub class_names: Vec<String>,
}

impl PreparedData {
    pub fn manifests(&self) -> Vec<Manifest> {
        match &self.splits {
            RawSplits::Xor => Vec::new(),
            RawSplits::Images { train, test } => vec![train.manifest.clone(), test.manifest.clone()],
            RawSplits::Tsv { train, test } => vec![train.manifest.clone(), test.manifest.clone()],
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        match &self.splits {
            RawSplits::Xor => (4, 4),
            RawSplits::Images { train, test } => (train.len(), test.len()),
            RawSplits::Tsv { train, test } => (train.len(), test.len()),
        }
    }
}

fn subset_split<T: Clone>(ds: Dataset<T>, per_class: Option<usize>, seed: u64, label: &str) -> Result<Dataset<T>> {
    match per_class {
        Some(n) => ds.subset(SubsetSpec::PerClass(n), derive_seed(seed, label, 0)),
        None => Ok(ds),
    }
}

/// Relabels both splits onto the sorted union of their class names.
fn align_classes(train: &mut Dataset<TsvPayload>, test: &mut Dataset<TsvPayload>) -> Vec<String> {
    let names: Vec<String> = train
        .class_names
        .iter()
        .chain(&test.class_names)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for ds in [train, test] {
        let map: Vec<usize> = ds
            .class_names
            .iter()
            .map(|n| names.binary_search(n).unwrap())
            .collect();
        for (_, y) in &mut ds.samples {
            *y = map[*y];
        }
        ds.class_names = names.clone();
    }
    names
}

/// Per-class subset size for MNIST when none is configured: 2000 images per
/// split. A larger request keeps every image of a class.
pub const MNIST_DESK_PER_CLASS: usize = 200;

/// Loads both splits and applies the per-class subsets.
pub fn prepare_data(cfg: &RunConfig) -> Result<PreparedData> {
    let seed = cfg.seed;
    match &cfg.dataset {
        DatasetConfig::Xor => Ok(PreparedData {
            splits: RawSplits::Xor,
            class_names: vec!["0".into(), "1".into()],
        }),
        DatasetConfig::Mnist { dir } => {
            let train = load_idx(dir.join(MNIST_TRAIN_IMAGES), dir.join(MNIST_TRAIN_LABELS))?;
            let test = load_idx(dir.join(MNIST_TEST_IMAGES), dir.join(MNIST_TEST_LABELS))?;
            let mut class_names = train.class_names.clone();
            if test.class_names.len() > class_names.len() {
                class_names = test.class_names.clone();
            }
            let per_class = |n: Option<usize>| n.or(Some(MNIST_DESK_PER_CLASS));
            let mut train = subset_split(train, per_class(cfg.train_per_class), seed, "subset-train")?;
            let mut test = subset_split(test, per_class(cfg.test_per_class), seed, "subset-test")?;
            train.class_names = class_names.clone();
            test.class_names = class_names.clone();
            Ok(PreparedData {
                splits: RawSplits::Images { train, test },
                class_names,
            })
        }
        DatasetConfig::Text { train, test, labels } => {
            prepare_tsv(cfg, train, test, &TsvSchema::Text, labels)
        }
        DatasetConfig::Fingerprint {
            train,
            test,
            length,
            labels,
        } => prepare_tsv(cfg, train, test, &TsvSchema::Fingerprint { length: *length }, labels),
    }
}

fn prepare_tsv(
    cfg: &RunConfig,
    train: &Path,
    test: &Path,
    schema: &TsvSchema,
    labels: &LabelPolicy,
) -> Result<PreparedData> {
    let mut tr = load_tsv(train, schema, labels)?.dataset;
    let mut te = load_tsv(test, schema, labels)?.dataset;
    let class_names = align_classes(&mut tr, &mut te);
    let train = subset_split(tr, cfg.train_per_class, cfg.seed, "subset-train")?;
    let test = subset_split(te, cfg.test_per_class, cfg.seed, "subset-test")?;
    Ok(PreparedData {
        splits: RawSplits::Tsv { train, test },
        class_names,
    })
}

pub fn xor_samples() -> Vec<Sample> {
    [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
        .iter()
        .map(|&(a, b, y)| (Hypervector::from_bools(&[a == 1, b == 1]), y))
        .collect()
}

/// Most frequent training words, ties broken alphabetically.
fn top_words(train: &Dataset<TsvPayload>, k: usize) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for (p, _) in &train.samples {
        if let TsvPayload::Text(t) = p {
            for w in tokenize(t).into_iter().collect::<BTreeSet<_>>() {
                *counts.entry(w).or_default() += 1;
            }
        }
    }
    let mut words: Vec<(String, usize)> = counts.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    words.into_iter().take(k).map(|(w, _)| w).collect()
}

/// Builds the replica's encoder and encodes both splits. Training samples
/// may admit new tokens; test samples never do.
pub fn encode_splits(cfg: &RunConfig, data: &PreparedData, encoder_seed: u64) -> Result<(Encoder, Vec<Sample>, Vec<Sample>)> {
    let hv = cfg.representation == Representation::Hypervector;
    match &data.splits {
        RawSplits::Xor => {
            // Two raw inputs; the representation setting does not apply.
            let enc = Encoder::Vanilla {
                num_features: 2,
                binarize_threshold: None,
            };
            Ok((enc, xor_samples(), xor_samples()))
        }
        RawSplits::Images { train, test } => {
            let Some((first, _)) = train.samples.first() else {
                return Err(Error::EmptyInput("training split"));
            };
            let o = &cfg.image;
            if hv {
                let spec = ImageEncoderSpec {
                    patch_height: o.patch_height,
                    patch_width: o.patch_width,
                    stride: o.stride,
                    binarize_threshold: o.binarize_threshold,
                    position_binding: o.position_binding,
                    skip_empty_patches: o.skip_empty_patches,
                    ..ImageEncoderSpec::new(cfg.hv_size, cfg.nbits, encoder_seed)
                };
                let mut enc = ImageEncoder::new(spec, first.rows, first.cols)?;
                let tr = train
                    .samples
                    .iter()
                    .map(|(x, y)| Ok((enc.encode_admit(x)?, *y)))
                    .collect::<Result<Vec<_>>>()?;
                let te = test
                    .samples
                    .par_iter()
                    .map(|(x, y)| Ok((enc.encode(x)?, *y)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((Encoder::Image(enc), tr, te))
            } else {
                let t = o.binarize_threshold;
                let n = first.rows * first.cols;
                let f = |ds: &Dataset<GrayImage>| {
                    ds.samples
                        .iter()
                        .map(|(x, y)| {
                            if x.rows * x.cols != n {
                                return Err(Error::DimensionMismatch { expected: n, found: x.rows * x.cols });
                            }
                            Ok((encode_vanilla(&binarize(x, t))?, *y))
                        })
                        .collect::<Result<Vec<_>>>()
                };
                let enc = Encoder::Vanilla {
                    num_features: n,
                    binarize_threshold: Some(t),
                };
                Ok((enc, f(train)?, f(test)?))
            }
        }
        RawSplits::Tsv { train, test } => {
            let is_text = matches!(cfg.dataset, DatasetConfig::Text { .. });
            match (is_text, hv) {
                (true, true) => {
                    let mut enc = TextEncoder::new(cfg.hv_size, cfg.nbits, encoder_seed)?;
                    let mut tr = Vec::with_capacity(train.len());
                    for (p, y) in &train.samples {
                        tr.push((enc.encode_admit(text_of(p)?), *y));
                    }
                    let te = test
                        .samples
                        .iter()
                        .map(|(p, y)| Ok((enc.encode(text_of(p)?), *y)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((Encoder::Text(enc), tr, te))
                }
                (true, false) => {
                    let words = top_words(train, cfg.vanilla_vocabulary);
                    if words.is_empty() {
                        return Err(Error::EmptyInput("training vocabulary"));
                    }
                    let enc = Encoder::BagOfWords(BagOfWords::new(words));
                    let tr = encode_with(&enc, train)?;
                    let te = encode_with(&enc, test)?;
                    Ok((enc, tr, te))
                }
                (false, true) => {
                    let DatasetConfig::Fingerprint { length, .. } = cfg.dataset else {
                        unreachable!()
                    };
                    let enc = FingerprintEncoder::new(length, cfg.hv_size, cfg.nbits, encoder_seed)?;
                    let enc = Encoder::Fingerprint(enc);
                    let tr = encode_with(&enc, train)?;
                    let te = encode_with(&enc, test)?;
                    Ok((enc, tr, te))
                }
                (false, false) => {
                    let DatasetConfig::Fingerprint { length, .. } = cfg.dataset else {
                        unreachable!()
                    };
                    let enc = Encoder::Vanilla {
                        num_features: length,
                        binarize_threshold: None,
                    };
                    let tr = encode_with(&enc, train)?;
                    let te = encode_with(&enc, test)?;
                    Ok((enc, tr, te))
                }
            }
        }
    }
}

fn text_of(p: &TsvPayload) -> Result<&str> {
    match p {
        TsvPayload::Text(t) => Ok(t),
        TsvPayload::Fingerprint(_) => Err(Error::Malformed("expected text payload".into())),
    }
}

fn encode_with(enc: &Encoder, ds: &Dataset<TsvPayload>) -> Result<Vec<Sample>> {
    ds.samples
        .par_iter()
        .map(|(p, y)| Ok((enc.encode_payload(p)?, *y)))
        .collect()
}

/// A replica's curve and models.
#[derive(Clone, Debug)]
pub struct ReplicaOutcome {
    pub record: RunRecord,
    /// Model at the epoch with the highest test accuracy (earliest on ties);
    /// the untrained model when no epoch ran.
    pub best_model: Model,
    pub final_model: Model,
}

pub fn tm_config(cfg: &RunConfig, num_features: usize, tm_seed: u64) -> TMConfig {
    let r = cfg.resolved();
    TMConfig {
        clauses_per_class: r.clauses_per_class,
        threshold: r.threshold,
        specificity: r.specificity,
        states_per_action: cfg.states_per_action,
        boost_true_positive: r.boost_true_positive,
        seed: tm_seed,
        num_features,
    }
}

/// Trains one seeded replica, evaluating on the test split after every
/// epoch.
pub fn run_replica(cfg: &RunConfig, data: &PreparedData, ensemble: usize) -> Result<ReplicaOutcome> {
    let seed = cfg.replica_seed(ensemble);
    let (encoder, train, test) = encode_splits(cfg, data, cfg.encoder_seed(ensemble))?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training split"));
    }
    if test.is_empty() {
        return Err(Error::EmptyInput("test split"));
    }
    let nf = encoder.output_size();
    let tmc = tm_config(cfg, nf, derive_seed(seed, "machine", 0));
    let mut tm = if matches!(data.splits, RawSplits::Xor) {
        TsetlinMachine::new_binary(tmc)?
    } else {
        TsetlinMachine::new_multiclass(tmc, data.class_names.len())?
    };
    let epochs = cfg.resolved().epochs;
    let mut curve = Vec::with_capacity(epochs);
    let mut best = (f64::NEG_INFINITY, tm.clone());
    for e in 0..epochs {
        let t0 = Instant::now();
        tm.fit_epoch(&train)?;
        let m = tm.evaluate(&test)?;
        curve.push(EpochRecord {
            epoch: e as u64 + 1,
            accuracy: m.accuracy,
            balanced_accuracy: m.balanced_accuracy,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
        if m.accuracy > best.0 {
            best = (m.accuracy, tm.clone());
        }
        log::debug!("replica {ensemble} epoch {} accuracy {:.4}", e + 1, m.accuracy);
    }
    if epochs == 0 {
        log::warn!("epochs = 0; the model is saved untrained");
    }
    let final_metrics: Metrics = tm.evaluate(&test)?;
    let (hv_size, nbits) = match encoder {
        Encoder::Vanilla { .. } | Encoder::BagOfWords(_) => (nf, None),
        _ => (cfg.hv_size, Some(cfg.nbits)),
    };
    let record = RunRecord {
        config: serde_json::to_value(cfg)?,
        hv_size,
        nbits,
        clauses: cfg.resolved().clauses_per_class,
        ensemble,
        seed,
        epochs: curve,
        final_metrics: Some(final_metrics),
    };
    record.validate()?;
    let names = data.class_names.clone();
    Ok(ReplicaOutcome {
        record,
        best_model: Model::new(best.1, encoder.clone(), names.clone())?,
        final_model: Model::new(tm, encoder, names)?,
    })
}

/// Runs `f` on a pool of `workers` threads (0 = every core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// All replicas of one configuration, in ensemble order. Replicas run
/// concurrently; results do not depend on the worker count.
pub fn run_ensemble(cfg: &RunConfig, data: &PreparedData) -> Result<Vec<ReplicaOutcome>> {
    cfg.validate()?;
    with_workers(cfg.workers, || {
        (0..cfg.ensembles)
            .into_par_iter()
            .map(|e| run_replica(cfg, data, e))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Axis lists for a sweep; an empty list keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub hv_sizes: Vec<usize>,
    pub nbits: Vec<usize>,
    pub clauses: Vec<usize>,
}

/// Cartesian product of the axes in `hv_size`, `nbits`, `clauses` order.
pub fn sweep_cells(base: &RunConfig, axes: &SweepAxes) -> Vec<RunConfig> {
    fn or_base<T: Clone>(v: &[T], b: T) -> Vec<T> {
        if v.is_empty() {
            vec![b]
        } else {
            v.to_vec()
        }
    }
    let hv = or_base(&axes.hv_sizes, base.hv_size);
    let nb = or_base(&axes.nbits, base.nbits);
    let cl = or_base(&axes.clauses, base.resolved().clauses_per_class);
    let mut out = Vec::new();
    for &d in &hv {
        for &n in &nb {
            for &c in &cl {
                let mut cfg = base.clone();
                cfg.hv_size = d;
                cfg.nbits = n;
                cfg.clauses_per_class = Some(c);
                out.push(cfg);
            }
        }
    }
    out
}
