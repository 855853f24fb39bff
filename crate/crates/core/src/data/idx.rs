//! IDX ubyte files (the MNIST container format).
//!
//! Layout, all integers big-endian: a `u32` magic (`0x00000803` for rank-3
//! image tensors, `0x00000801` for rank-1 label vectors), one `u32` per
//! dimension, then the raw bytes. Files starting with the gzip magic are
//! decompressed transparently.

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::data::dataset::{Dataset, Manifest, SourceFile};
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// A grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: pixels.len(),
            });
        }
        Ok(Self { rows, cols, pixels })
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.cols + c]
    }
}

/// Reads a file, gunzipping if needed. Returns the bytes and the SHA-256 of
/// the bytes as stored on disk.
pub(crate) fn read_maybe_gz(path: &Path) -> Result<(Vec<u8>, String)> {
    let raw = std::fs::read(path)?;
    let hash = super::dataset::sha256_hex(&raw);
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok((out, hash))
    } else {
        Ok((raw, hash))
    }
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                offset: self.bytes.len() as u64,
                message: format!(
                    "needed {n} bytes for {what} at offset {}, file ends at {}",
                    self.pos,
                    self.bytes.len()
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

fn check_magic(cur: &mut Cursor<'_>, expected: u32) -> Result<()> {
    let found = cur.u32("magic number")?;
    if found != expected {
        return Err(Error::BadMagic {
            path: cur.path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok(())
}

pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<Vec<GrayImage>> {
    let mut cur = Cursor { path, bytes, pos: 0 };
    check_magic(&mut cur, IMAGES_MAGIC)?;
    let n = cur.u32("image count")? as usize;
    let rows = cur.u32("row count")? as usize;
    let cols = cur.u32("column count")? as usize;
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let px = cur.take(rows * cols, &format!("image {i}"))?;
        images.push(GrayImage {
            rows,
            cols,
            pixels: px.to_vec(),
        });
    }
    Ok(images)
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    let mut cur = Cursor { path, bytes, pos: 0 };
    check_magic(&mut cur, LABELS_MAGIC)?;
    let n = cur.u32("label count")? as usize;
    Ok(cur.take(n, "labels")?.to_vec())
}

/// Loads an image/label file pair. Class ids are the label bytes; class
/// names are `"0"..="9"` up to the largest label seen.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset<GrayImage>> {
    let (ip, lp) = (images.as_ref(), labels.as_ref());
    let (ib, ih) = read_maybe_gz(ip)?;
    let (lb, lh) = read_maybe_gz(lp)?;
    let imgs = parse_images(ip, &ib)?;
    let labs = parse_labels(lp, &lb)?;
    if imgs.len() != labs.len() {
        return Err(Error::Malformed(format!(
            "{} images but {} labels",
            imgs.len(),
            labs.len()
        )));
    }
    let num_classes = labs.iter().copied().max().map_or(0, |m| m as usize + 1);
    let samples = imgs
        .into_iter()
        .zip(labs)
        .map(|(img, y)| (img, y as usize))
        .collect();
    Ok(Dataset {
        samples,
        class_names: (0..num_classes).map(|c| c.to_string()).collect(),
        manifest: Manifest::from_sources(vec![
            SourceFile::new(PathBuf::from(ip), ih),
            SourceFile::new(PathBuf::from(lp), lh),
        ]),
    })
}

/// Serializes images in IDX form (uncompressed).
pub fn encode_images(images: &[GrayImage]) -> Result<Vec<u8>> {
    let (rows, cols) = images.first().map_or((0, 0), |i| (i.rows, i.cols));
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [images.len(), rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for img in images {
        if (img.rows, img.cols) != (rows, cols) {
            return Err(Error::Malformed("images differ in shape".into()));
        }
        out.extend_from_slice(&img.pixels);
    }
    Ok(out)
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
