//! Seeded token codebooks.
//!
//! A token's hypervector depends only on `(size, nbits, seed, token id)`:
//! positions are drawn without replacement from a stream keyed on the seed
//! and the id. The codebook itself is an insertion-ordered cache of those
//! vectors, so two codebooks built from the same parameters agree on every
//! token they share regardless of when it was admitted.

use std::borrow::Cow;
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::rng::derive_stream;

pub const CODEBOOK_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenCodebook {
    size: usize,
    nbits: usize,
    seed: u64,
    entries: IndexMap<String, Hypervector>,
}

impl TokenCodebook {
    pub fn new(size: usize, nbits: usize, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::config("hv_size", "must be positive"));
        }
        if nbits == 0 || nbits > size {
            return Err(Error::config(
                "nbits",
                format!("must be in 1..={size}, got {nbits}"),
            ));
        }
        Ok(Self {
            size,
            nbits,
            seed,
            entries: IndexMap::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&Hypervector> {
        self.entries.get(id)
    }

    /// Entry at insertion index `i`. Panics if out of range.
    pub fn get_index(&self, i: usize) -> (&str, &Hypervector) {
        let (k, v) = self.entries.get_index(i).expect("codebook index in range");
        (k.as_str(), v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Hypervector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// The vector `id` would receive, without storing it.
    pub fn derive(&self, id: &str) -> Hypervector {
        let mut rng = derive_stream(self.seed, &[b"token", id.as_bytes()]);
        let mut v = Hypervector::zeros(self.size);
        let mut placed = 0;
        while placed < self.nbits {
            let p = rng.random_range(0..self.size);
            if !v.get(p) {
                v.set(p, true);
                placed += 1;
            }
        }
        v
    }

    /// Admits a new token. Fails if `id` is already present.
    pub fn new_token(&mut self, id: &str) -> Result<&Hypervector> {
        if self.entries.contains_key(id) {
            return Err(Error::DuplicateToken(id.to_string()));
        }
        let v = self.derive(id);
        Ok(self.entries.entry(id.to_string()).or_insert(v))
    }

    /// Returns the stored vector, admitting the token first if needed.
    pub fn get_or_insert(&mut self, id: &str) -> &Hypervector {
        if !self.entries.contains_key(id) {
            let v = self.derive(id);
            self.entries.insert(id.to_string(), v);
        }
        &self.entries[id]
    }

    /// Stored vector if present, otherwise the derived one.
    pub fn get_or_derive(&self, id: &str) -> Cow<'_, Hypervector> {
        match self.entries.get(id) {
            Some(v) => Cow::Borrowed(v),
            None => Cow::Owned(self.derive(id)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CodebookFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: CodebookFile = serde_json::from_str(s)?;
        f.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form: `{version, size, nbits, seed, tokens: [{id, positions}]}`
/// with positions ascending.
#[derive(Serialize, Deserialize)]
pub(crate) struct CodebookFile {
    version: u32,
    size: usize,
    nbits: usize,
    seed: u64,
    tokens: Vec<TokenEntry>,
}

#[derive(Serialize, Deserialize)]
struct TokenEntry {
    id: String,
    positions: Vec<usize>,
}

impl From<&TokenCodebook> for CodebookFile {
    fn from(cb: &TokenCodebook) -> Self {
        CodebookFile {
            version: CODEBOOK_VERSION,
            size: cb.size,
            nbits: cb.nbits,
            seed: cb.seed,
            tokens: cb
                .entries
                .iter()
                .map(|(id, v)| TokenEntry {
                    id: id.clone(),
                    positions: v.positions(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CodebookFile> for TokenCodebook {
    type Error = Error;

    fn try_from(f: CodebookFile) -> Result<Self> {
        if f.version != CODEBOOK_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "codebook",
                found: f.version,
                supported: CODEBOOK_VERSION,
            });
        }
        let mut cb = TokenCodebook::new(f.size, f.nbits, f.seed)?;
        for t in f.tokens {
            let v = Hypervector::from_positions(f.size, &t.positions)?;
            if v.popcount() != f.nbits {
                return Err(Error::Malformed(format!(
                    "token `{}` has {} set bits, codebook nbits is {}",
                    t.id,
                    v.popcount(),
                    f.nbits
                )));
            }
            if cb.entries.insert(t.id.clone(), v).is_some() {
                return Err(Error::DuplicateToken(t.id));
            }
        }
        Ok(cb)
    }
}

impl Serialize for TokenCodebook {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodebookFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TokenCodebook {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CodebookFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_has_exact_popcount() {
        let mut cb = TokenCodebook::new(16, 4, 99).unwrap();
        let v = cb.new_token("a").unwrap().clone();
        assert_eq!(v.popcount(), 4);
        assert!(v.positions().iter().all(|&p| p < 16));
    }

    #[test]
    fn saturated_token_is_all_ones() {
        let mut cb = TokenCodebook::new(4, 4, 1).unwrap();
        assert_eq!(cb.new_token("a").unwrap(), &Hypervector::ones(4));
    }

    #[test]
    fn same_parameters_same_token() {
        let mut a = TokenCodebook::new(1024, 8, 5).unwrap();
        let mut b = TokenCodebook::new(1024, 8, 5).unwrap();
        b.new_token("other").unwrap();
        assert_eq!(a.new_token("a").unwrap(), b.new_token("a").unwrap());
        let mut c = TokenCodebook::new(1024, 8, 6).unwrap();
        assert_ne!(a.get("a").unwrap(), c.new_token("a").unwrap());
    }

    #[test]
    fn duplicate_and_config_errors() {
        let mut cb = TokenCodebook::new(8, 2, 0).unwrap();
        cb.new_token("x").unwrap();
        assert!(matches!(cb.new_token("x"), Err(Error::DuplicateToken(_))));
        assert!(TokenCodebook::new(8, 9, 0).is_err());
        assert!(TokenCodebook::new(8, 0, 0).is_err());
    }

    #[test]
    fn json_layout_and_round_trip() {
        let mut cb = TokenCodebook::new(32, 3, 11).unwrap();
        for id in ["b", "a", "c"] {
            cb.new_token(id).unwrap();
        }
        let s = cb.to_json().unwrap();
        assert!(s.starts_with(r#"{"version":1,"size":32,"nbits":3,"seed":11,"tokens":[{"id":"b","positions":["#));
        let back = TokenCodebook::from_json(&s).unwrap();
        assert_eq!(back, cb);
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn rejects_bad_files() {
        let bad_version = r#"{"version":9,"size":8,"nbits":2,"seed":0,"tokens":[]}"#;
        assert!(matches!(
            TokenCodebook::from_json(bad_version),
            Err(Error::UnsupportedVersion { found: 9, .. })
        ));
        let bad_pop = r#"{"version":1,"size":8,"nbits":2,"seed":0,"tokens":[{"id":"a","positions":[1]}]}"#;
        assert!(TokenCodebook::from_json(bad_pop).is_err());
    }
}
