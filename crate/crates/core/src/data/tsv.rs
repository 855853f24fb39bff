//! Tab-separated text and fingerprint datasets.
//!
//! Every line is `label<TAB>payload`. Text payloads are UTF-8 strings.
//! Fingerprint payloads are hex strings of exactly `length / 4` digits;
//! digit `i` holds bits `4i..4i+4` with bit `4i` in its most significant
//! position. Lines that fail to parse are reported, not fatal.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::dataset::{sha256_hex, Dataset, Manifest, SourceFile};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TsvSchema {
    Text,
    Fingerprint { length: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TsvPayload {
    Text(String),
    /// Sorted set-bit positions.
    Fingerprint(Vec<usize>),
}

/// Label normalization applied before class ids are assigned.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPolicy {
    /// `(from, to)` pairs; a label equal to `from` becomes `to`.
    #[serde(default)]
    pub merge: Vec<(String, String)>,
    /// Keep only the part before this character (`"DESC:manner"` becomes
    /// `"DESC"` with `':'`).
    #[serde(default)]
    pub coarse_separator: Option<char>,
}

impl LabelPolicy {
    /// HIV screening outcomes: confirmed active (CA) and moderately active
    /// (CM) become `Active`, confirmed inactive (CI) becomes `Inactive`.
    pub fn hiv() -> Self {
        Self {
            merge: vec![
                ("CA".into(), "Active".into()),
                ("CM".into(), "Active".into()),
                ("CI".into(), "Inactive".into()),
            ],
            coarse_separator: None,
        }
    }

    /// TREC question classes reduced to the six coarse categories.
    pub fn trec_coarse() -> Self {
        Self {
            merge: Vec::new(),
            coarse_separator: Some(':'),
        }
    }

    pub fn apply(&self, label: &str) -> String {
        let label = match self.coarse_separator {
            Some(c) => label.split(c).next().unwrap_or(label),
            None => label,
        };
        self.merge
            .iter()
            .find(|(from, _)| from == label)
            .map_or_else(|| label.to_string(), |(_, to)| to.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedLine {
    /// 1-based.
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct TsvLoad {
    pub dataset: Dataset<TsvPayload>,
    pub rejected: Vec<RejectedLine>,
}

pub fn parse_hex_bits(hex: &str, length: usize) -> std::result::Result<Vec<usize>, String> {
    if length % 4 != 0 {
        return Err(format!("fingerprint length {length} is not a multiple of 4"));
    }
    let digits = hex.trim();
    if digits.len() != length / 4 {
        return Err(format!(
            "expected {} hex digits for {length} bits, found {}",
            length / 4,
            digits.len()
        ));
    }
    let mut positions = Vec::new();
    for (i, ch) in digits.chars().enumerate() {
        let v = ch
            .to_digit(16)
            .ok_or_else(|| format!("invalid hex digit {ch:?} at column {}", i + 1))?;
        for b in 0..4 {
            if v & (0b1000 >> b) != 0 {
                positions.push(4 * i + b);
            }
        }
    }
    Ok(positions)
}

/// Inverse of [`parse_hex_bits`].
pub fn format_hex_bits(positions: &[usize], length: usize) -> Result<String> {
    if length % 4 != 0 {
        return Err(Error::config("fingerprint_length", "must be a multiple of 4"));
    }
    let mut nibbles = vec![0u8; length / 4];
    for &p in positions {
        if p >= length {
            return Err(Error::PositionOutOfRange { position: p, size: length });
        }
        nibbles[p / 4] |= 0b1000 >> (p % 4);
    }
    Ok(nibbles
        .iter()
        .map(|&n| char::from_digit(n as u32, 16).unwrap())
        .collect())
}

/// Parses TSV content. Class ids follow the sorted order of normalized label
/// names, so they do not depend on line order.
pub fn parse_tsv(content: &str, schema: &TsvSchema, policy: &LabelPolicy) -> TsvLoad {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let Some((label, payload)) = line.split_once('\t') else {
            rejected.push(RejectedLine {
                line: line_no,
                reason: "missing TAB separator".into(),
            });
            continue;
        };
        let label = policy.apply(label.trim());
        if label.is_empty() {
            rejected.push(RejectedLine {
                line: line_no,
                reason: "empty label".into(),
            });
            continue;
        }
        let payload = match schema {
            TsvSchema::Text => TsvPayload::Text(payload.to_string()),
            TsvSchema::Fingerprint { length } => match parse_hex_bits(payload, *length) {
                Ok(p) => TsvPayload::Fingerprint(p),
                Err(reason) => {
                    rejected.push(RejectedLine { line: line_no, reason });
                    continue;
                }
            },
        };
        rows.push((label, payload));
    }
    let class_names: Vec<String> = rows
        .iter()
        .map(|(l, _)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let samples = rows
        .into_iter()
        .map(|(l, p)| (p, class_names.binary_search(&l).unwrap()))
        .collect();
    TsvLoad {
        dataset: Dataset {
            samples,
            class_names,
            manifest: Manifest::default(),
        },
        rejected,
    }
}

pub fn load_tsv(path: impl AsRef<Path>, schema: &TsvSchema, policy: &LabelPolicy) -> Result<TsvLoad> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let content = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Malformed(format!("{}: not UTF-8: {e}", path.display())))?;
    let mut load = parse_tsv(content, schema, policy);
    for r in &load.rejected {
        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
    }
    load.dataset.manifest =
        Manifest::from_sources(vec![SourceFile::new(PathBuf::from(path), sha256_hex(&bytes))]);
    Ok(load)
}
