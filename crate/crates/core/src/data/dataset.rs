use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::derive_stream;

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a file's on-disk bytes, lowercase hex.
pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl SourceFile {
    pub fn new(path: PathBuf, sha256: String) -> Self {
        Self { path, sha256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSpec {
    PerClass(usize),
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub spec: SubsetSpec,
    pub seed: u64,
    /// Samples kept per class id.
    pub sizes: Vec<usize>,
}

/// Where a dataset came from and how it was cut down.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sources: Vec<SourceFile>,
    pub subsets: Vec<SubsetRecord>,
}

impl Manifest {
    pub fn from_sources(sources: Vec<SourceFile>) -> Self {
        Self {
            sources,
            subsets: Vec::new(),
        }
    }
}

/// Labelled samples with dense class ids in `0..class_names.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub samples: Vec<(T, usize)>,
    pub class_names: Vec<String>,
    pub manifest: Manifest,
}

impl<T> Dataset<T> {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|(_, y)| *y).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for (_, y) in &self.samples {
            counts[*y] += 1;
        }
        counts
    }

    /// Applies `f` to every payload, keeping labels and provenance.
    pub fn try_map<U, F>(&self, mut f: F) -> Result<Dataset<U>>
    where
        F: FnMut(&T) -> Result<U>,
    {
        let samples = self
            .samples
            .iter()
            .map(|(x, y)| Ok((f(x)?, *y)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            class_names: self.class_names.clone(),
            manifest: self.manifest.clone(),
        })
    }
}

impl<T: Clone> Dataset<T> {
    /// Stratified deterministic sample.
    ///
    /// Each class is shuffled with a stream keyed by `(seed, class id)` and
    /// the first `k` members are kept; kept samples stay in their original
    /// relative order. `Fraction(1.0)` is the identity. Asking for more than
    /// a class holds keeps the whole class and logs a warning.
    pub fn subset(&self, spec: SubsetSpec, seed: u64) -> Result<Self> {
        if let SubsetSpec::Fraction(f) = spec {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config("fraction", format!("{f} is outside (0, 1]")));
            }
        }
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, (_, y)) in self.samples.iter().enumerate() {
            by_class.entry(*y).or_default().push(i);
        }
        let mut sizes = vec![0; self.num_classes()];
        let mut keep = vec![false; self.samples.len()];
        for (class, mut members) in by_class {
            let k = match spec {
                SubsetSpec::PerClass(n) => {
                    if n > members.len() {
                        log::warn!(
                            "class {class} has {} samples, fewer than the {n} requested; keeping all",
                            members.len()
                        );
                    }
                    n.min(members.len())
                }
                SubsetSpec::Fraction(f) => ((members.len() as f64) * f).round() as usize,
            };
            if k < members.len() {
                let mut rng = derive_stream(seed, &[b"subset", &(class as u64).to_le_bytes()]);
                members.shuffle(&mut rng);
            }
            for &i in &members[..k] {
                keep[i] = true;
            }
            sizes[class] = k;
        }
        let samples = self
            .samples
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        let mut manifest = self.manifest.clone();
        manifest.subsets.push(SubsetRecord { spec, seed, sizes });
        Ok(Self {
            samples,
            class_names: self.class_names.clone(),
            manifest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset<u32> {
        let samples = (0..30u32).map(|i| (i, (i % 3) as usize)).collect();
        Dataset {
            samples,
            class_names: vec!["a".into(), "b".into(), "c".into()],
            manifest: Manifest::default(),
        }
    }

    #[test]
    fn full_fraction_is_identity() {
        let d = toy();
        let s = d.subset(SubsetSpec::Fraction(1.0), 9).unwrap();
        assert_eq!(s.samples, d.samples);
        assert_eq!(s.manifest.subsets[0].sizes, vec![10, 10, 10]);
    }

    #[test]
    fn per_class_is_stratified_and_deterministic() {
        let d = toy();
        let a = d.subset(SubsetSpec::PerClass(4), 1).unwrap();
        let b = d.subset(SubsetSpec::PerClass(4), 1).unwrap();
        let c = d.subset(SubsetSpec::PerClass(4), 2).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.class_counts(), vec![4, 4, 4]);
        assert!(a.samples.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn oversized_request_keeps_class() {
        let s = toy().subset(SubsetSpec::PerClass(50), 0).unwrap();
        assert_eq!(s.len(), 30);
    }

    #[test]
    fn bad_fraction() {
        assert!(toy().subset(SubsetSpec::Fraction(0.0), 0).is_err());
        assert!(toy().subset(SubsetSpec::Fraction(1.5), 0).is_err());
    }

    #[test]
    fn hash_changes_with_bytes() {
        assert_ne!(sha256_hex(b"a"), sha256_hex(b"b"));
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
