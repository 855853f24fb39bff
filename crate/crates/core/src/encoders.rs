//! Booleanization front-ends: each turns one raw sample into one hypervector.
//!
//! Encoders are pure functions of `(input, encoder state)`. The only
//! mutation is codebook admission during training (`*_admit` methods), which
//! stores vectors that [`TokenCodebook::get_or_derive`] would produce anyway,
//! so admission never changes an encoding.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::codebook::TokenCodebook;
use crate::data::{GrayImage, TsvPayload};
use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::rng::derive_seed;

pub const PATCH_SHIFT: i64 = 0;
pub const ROW_SHIFT: i64 = 1;
pub const COL_SHIFT: i64 = 2;

/// ORs `token` rotated right by `k` into `acc`, touching only set bits.
fn or_sparse_rotated(acc: &mut Hypervector, token: &Hypervector, k: i64) {
    let d = acc.size() as i64;
    for p in token.positions() {
        acc.set((p as i64 + k).rem_euclid(d) as usize, true);
    }
}

/// Raw Booleanized features as a width-`bits.len()` vector.
pub fn encode_vanilla(bits: &[bool]) -> Result<Hypervector> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("feature vector"));
    }
    Ok(Hypervector::from_bools(bits))
}

/// Pixels strictly above `threshold` become 1.
pub fn binarize(img: &GrayImage, threshold: u8) -> Vec<bool> {
    img.pixels.iter().map(|&p| p > threshold).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageEncoderSpec {
    pub patch_height: usize,
    pub patch_width: usize,
    pub stride: usize,
    pub binarize_threshold: u8,
    pub hv_size: usize,
    pub nbits: usize,
    pub seed: u64,
    /// Rotate each patch token by its grid position index before bundling.
    pub position_binding: bool,
    /// Leave patches with no set pixel out of the bundle.
    pub skip_empty_patches: bool,
    pub row_shift: i64,
    pub col_shift: i64,
}

impl ImageEncoderSpec {
    /// Default encoding: single-pixel patches bound to their position, empty
    /// patches skipped, plus row and column role tokens.
    pub fn new(hv_size: usize, nbits: usize, seed: u64) -> Self {
        Self {
            patch_height: 1,
            patch_width: 1,
            stride: 1,
            binarize_threshold: 75,
            hv_size,
            nbits,
            seed,
            position_binding: true,
            skip_empty_patches: true,
            row_shift: ROW_SHIFT,
            col_shift: COL_SHIFT,
        }
    }

    /// Content-addressed 10x10 patches; position enters only through the row
    /// and column role tokens.
    pub fn content_addressed(hv_size: usize, nbits: usize, seed: u64) -> Self {
        Self {
            patch_height: 10,
            patch_width: 10,
            position_binding: false,
            skip_empty_patches: false,
            ..Self::new(hv_size, nbits, seed)
        }
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.patch_height == 0 || self.patch_width == 0 {
            return Err(Error::config("patch", "dimensions must be positive"));
        }
        if self.stride == 0 {
            return Err(Error::config("stride", "must be positive"));
        }
        if self.patch_height > rows || self.patch_width > cols {
            return Err(Error::config(
                "patch",
                format!(
                    "{}x{} patch is larger than {rows}x{cols} image",
                    self.patch_height, self.patch_width
                ),
            ));
        }
        Ok(())
    }
}

/// Image encoder with its three codebooks.
///
/// Row and column tokens are admitted for every grid coordinate at
/// construction. Patch tokens are keyed by the hex form of the patch's bit
/// pattern (row-major, first pixel most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ImageEncoderParts", from = "ImageEncoderParts")]
pub struct ImageEncoder {
    spec: ImageEncoderSpec,
    image_rows: usize,
    image_cols: usize,
    patches: TokenCodebook,
    rows: TokenCodebook,
    cols: TokenCodebook,
    /// Row and column tokens already rotated by their role shifts.
    bound_rows: Vec<Hypervector>,
    bound_cols: Vec<Hypervector>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ImageEncoderParts {
    spec: ImageEncoderSpec,
    image_rows: usize,
    image_cols: usize,
    patches: TokenCodebook,
    rows: TokenCodebook,
    cols: TokenCodebook,
}

impl From<ImageEncoderParts> for ImageEncoder {
    fn from(p: ImageEncoderParts) -> Self {
        let bound_rows = p.rows.iter().map(|(_, v)| v.rotate(p.spec.row_shift)).collect();
        let bound_cols = p.cols.iter().map(|(_, v)| v.rotate(p.spec.col_shift)).collect();
        Self {
            spec: p.spec,
            image_rows: p.image_rows,
            image_cols: p.image_cols,
            patches: p.patches,
            rows: p.rows,
            cols: p.cols,
            bound_rows,
            bound_cols,
        }
    }
}

impl From<ImageEncoder> for ImageEncoderParts {
    fn from(e: ImageEncoder) -> Self {
        Self {
            spec: e.spec,
            image_rows: e.image_rows,
            image_cols: e.image_cols,
            patches: e.patches,
            rows: e.rows,
            cols: e.cols,
        }
    }
}

impl ImageEncoder {
    pub fn new(spec: ImageEncoderSpec, image_rows: usize, image_cols: usize) -> Result<Self> {
        spec.validate(image_rows, image_cols)?;
        let (d, n, s) = (spec.hv_size, spec.nbits, spec.seed);
        let grid_rows = (image_rows - spec.patch_height) / spec.stride + 1;
        let grid_cols = (image_cols - spec.patch_width) / spec.stride + 1;
        let mut rows = TokenCodebook::new(d, n, derive_seed(s, "row", 0))?;
        for i in 0..grid_rows {
            rows.new_token(&(i * spec.stride).to_string())?;
        }
        let mut cols = TokenCodebook::new(d, n, derive_seed(s, "col", 0))?;
        for j in 0..grid_cols {
            cols.new_token(&(j * spec.stride).to_string())?;
        }
        Ok(ImageEncoderParts {
            patches: TokenCodebook::new(d, n, derive_seed(s, "patch", 0))?,
            spec,
            image_rows,
            image_cols,
            rows,
            cols,
        }
        .into())
    }

    pub fn spec(&self) -> &ImageEncoderSpec {
        &self.spec
    }

    pub fn image_shape(&self) -> (usize, usize) {
        (self.image_rows, self.image_cols)
    }

    pub fn patch_codebook(&self) -> &TokenCodebook {
        &self.patches
    }

    pub fn row_codebook(&self) -> &TokenCodebook {
        &self.rows
    }

    pub fn col_codebook(&self) -> &TokenCodebook {
        &self.cols
    }

    /// Number of patch positions along each axis.
    pub fn grid(&self) -> (usize, usize) {
        let s = &self.spec;
        (
            (self.image_rows - s.patch_height) / s.stride + 1,
            (self.image_cols - s.patch_width) / s.stride + 1,
        )
    }

    /// Rotation applied to a patch token at grid cell `(gr, gc)`.
    pub fn patch_shift(&self, gr: usize, gc: usize) -> i64 {
        if self.spec.position_binding {
            (gr * self.grid().1 + gc) as i64
        } else {
            PATCH_SHIFT
        }
    }

    /// Token id of the patch whose top-left pixel is `(r, c)`, and whether
    /// any of its pixels is set.
    fn patch_id(&self, bits: &[bool], r: usize, c: usize) -> (String, bool) {
        let (h, w) = (self.spec.patch_height, self.spec.patch_width);
        let n = h * w;
        let pad = (4 - n % 4) % 4;
        let mut id = String::with_capacity((n + pad) / 4);
        let mut nibble = 0u32;
        let mut filled = pad;
        let mut any = false;
        for dr in 0..h {
            let row = (r + dr) * self.image_cols + c;
            for &b in &bits[row..row + w] {
                nibble = (nibble << 1) | b as u32;
                any |= b;
                filled += 1;
                if filled == 4 {
                    id.push(char::from_digit(nibble, 16).unwrap());
                    nibble = 0;
                    filled = 0;
                }
            }
        }
        (id, any)
    }

    /// The hypervector one patch contributes at grid cell `(gr, gc)`.
    pub fn position_hv(&self, patch_id: &str, gr: usize, gc: usize) -> Result<Hypervector> {
        let (ngr, ngc) = self.grid();
        if gr >= ngr {
            return Err(Error::UnknownToken(format!("row {}", gr * self.spec.stride)));
        }
        if gc >= ngc {
            return Err(Error::UnknownToken(format!("column {}", gc * self.spec.stride)));
        }
        let mut v = Hypervector::zeros(self.spec.hv_size);
        or_sparse_rotated(&mut v, &self.patches.get_or_derive(patch_id), self.patch_shift(gr, gc));
        let (rows, cols) = self.roles();
        v.or_assign(&rows[gr])?;
        v.or_assign(&cols[gc])?;
        Ok(v)
    }

    fn roles(&self) -> (&[Hypervector], &[Hypervector]) {
        (&self.bound_rows, &self.bound_cols)
    }

    fn check_shape(&self, img: &GrayImage) -> Result<()> {
        if (img.rows, img.cols) != (self.image_rows, self.image_cols) {
            return Err(Error::DimensionMismatch {
                expected: self.image_rows * self.image_cols,
                found: img.rows * img.cols,
            });
        }
        Ok(())
    }

    fn cells(&self, img: &GrayImage) -> Vec<(usize, usize, String)> {
        let bits = binarize(img, self.spec.binarize_threshold);
        let (ngr, ngc) = self.grid();
        let mut out = Vec::new();
        for gr in 0..ngr {
            for gc in 0..ngc {
                let (id, any) = self.patch_id(&bits, gr * self.spec.stride, gc * self.spec.stride);
                if any || !self.spec.skip_empty_patches {
                    out.push((gr, gc, id));
                }
            }
        }
        out
    }

    fn bundle_cells(&self, cells: &[(usize, usize, String)]) -> Result<Hypervector> {
        let (rows, cols) = self.roles();
        let mut acc = Hypervector::zeros(self.spec.hv_size);
        let mut last: Option<(&str, Hypervector)> = None;
        for (gr, gc, id) in cells {
            let token = match &last {
                Some((prev, v)) if *prev == id.as_str() => v.clone(),
                _ => self.patches.get_or_derive(id).into_owned(),
            };
            or_sparse_rotated(&mut acc, &token, self.patch_shift(*gr, *gc));
            acc.or_assign(&rows[*gr])?;
            acc.or_assign(&cols[*gc])?;
            last = Some((id.as_str(), token));
        }
        Ok(acc)
    }

    pub fn encode(&self, img: &GrayImage) -> Result<Hypervector> {
        self.check_shape(img)?;
        self.bundle_cells(&self.cells(img))
    }

    /// Like [`encode`](Self::encode), also storing the patch tokens seen.
    pub fn encode_admit(&mut self, img: &GrayImage) -> Result<Hypervector> {
        self.check_shape(img)?;
        let cells = self.cells(img);
        for (_, _, id) in &cells {
            self.patches.get_or_insert(id);
        }
        self.bundle_cells(&cells)
    }
}

/// Lowercases, splits on whitespace and strips every non-alphanumeric
/// character; tokens left empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Bag-of-words text encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextEncoder {
    vocabulary: TokenCodebook,
}

impl TextEncoder {
    pub fn new(hv_size: usize, nbits: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            vocabulary: TokenCodebook::new(hv_size, nbits, derive_seed(seed, "word", 0))?,
        })
    }

    pub fn from_codebook(vocabulary: TokenCodebook) -> Self {
        Self { vocabulary }
    }

    pub fn vocabulary(&self) -> &TokenCodebook {
        &self.vocabulary
    }

    fn empty(&self) -> Hypervector {
        log::warn!("text has no tokens to encode; using the zero vector");
        Hypervector::zeros(self.vocabulary.size())
    }

    /// Training mode: out-of-vocabulary words are admitted.
    pub fn encode_admit(&mut self, text: &str) -> Hypervector {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return self.empty();
        }
        let mut acc = Hypervector::zeros(self.vocabulary.size());
        for t in &tokens {
            acc.or_assign(self.vocabulary.get_or_insert(t))
                .expect("vocabulary vectors share the codebook size");
        }
        acc
    }

    /// Evaluation mode: out-of-vocabulary words are skipped.
    pub fn encode(&self, text: &str) -> Hypervector {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return self.empty();
        }
        let mut acc = Hypervector::zeros(self.vocabulary.size());
        for v in tokens.iter().filter_map(|t| self.vocabulary.get(t)) {
            acc.or_assign(v).expect("vocabulary vectors share the codebook size");
        }
        acc
    }
}

pub const DEFAULT_FINGERPRINT_LENGTH: usize = 4096;

/// One token per fingerprint bit position, ids `"0"..`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintEncoder {
    fingerprint_length: usize,
    positions: TokenCodebook,
}

impl FingerprintEncoder {
    pub fn new(fingerprint_length: usize, hv_size: usize, nbits: usize, seed: u64) -> Result<Self> {
        if fingerprint_length == 0 {
            return Err(Error::config("fingerprint_length", "must be positive"));
        }
        let mut positions = TokenCodebook::new(hv_size, nbits, derive_seed(seed, "bit", 0))?;
        for i in 0..fingerprint_length {
            positions.new_token(&i.to_string())?;
        }
        Ok(Self {
            fingerprint_length,
            positions,
        })
    }

    pub fn fingerprint_length(&self) -> usize {
        self.fingerprint_length
    }

    pub fn codebook(&self) -> &TokenCodebook {
        &self.positions
    }

    pub fn encode(&self, set_bits: &[usize]) -> Result<Hypervector> {
        let mut acc = Hypervector::zeros(self.positions.size());
        for &p in set_bits {
            if p >= self.fingerprint_length {
                return Err(Error::PositionOutOfRange {
                    position: p,
                    size: self.fingerprint_length,
                });
            }
            let (_, v) = self.positions.get_index(p);
            acc.or_assign(v)?;
        }
        Ok(acc)
    }
}

/// Raw-feature text baseline: feature `i` is the presence of `words[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "BagOfWordsParts", into = "BagOfWordsParts")]
pub struct BagOfWords {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct BagOfWordsParts {
    words: Vec<String>,
}

impl From<BagOfWordsParts> for BagOfWords {
    fn from(p: BagOfWordsParts) -> Self {
        Self::new(p.words)
    }
}

impl From<BagOfWords> for BagOfWordsParts {
    fn from(b: BagOfWords) -> Self {
        Self { words: b.words }
    }
}

impl BagOfWords {
    /// Later duplicates of a word are ignored.
    pub fn new(words: Vec<String>) -> Self {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            index.entry(w.clone()).or_insert(i);
        }
        Self { words, index }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn encode(&self, text: &str) -> Hypervector {
        let mut v = Hypervector::zeros(self.words.len());
        for t in tokenize(text) {
            if let Some(&i) = self.index.get(&t) {
                v.set(i, true);
            }
        }
        v
    }
}

/// Any encoder, as stored alongside a trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    /// Raw features; images are binarized pixel-wise.
    Vanilla {
        num_features: usize,
        binarize_threshold: Option<u8>,
    },
    BagOfWords(BagOfWords),
    Image(ImageEncoder),
    Text(TextEncoder),
    Fingerprint(FingerprintEncoder),
}

impl Encoder {
    /// Width of the vectors this encoder produces.
    pub fn output_size(&self) -> usize {
        match self {
            Encoder::Vanilla { num_features, .. } => *num_features,
            Encoder::BagOfWords(b) => b.words.len(),
            Encoder::Image(e) => e.spec.hv_size,
            Encoder::Text(e) => e.vocabulary.size(),
            Encoder::Fingerprint(e) => e.positions.size(),
        }
    }

    /// Encodes a TSV payload without admitting tokens.
    pub fn encode_payload(&self, p: &TsvPayload) -> Result<Hypervector> {
        match (self, p) {
            (Encoder::Vanilla { num_features, .. }, TsvPayload::Fingerprint(bits)) => {
                Hypervector::from_positions(*num_features, bits)
            }
            (Encoder::Fingerprint(e), TsvPayload::Fingerprint(bits)) => e.encode(bits),
            (Encoder::Text(e), TsvPayload::Text(t)) => Ok(e.encode(t)),
            (Encoder::BagOfWords(b), TsvPayload::Text(t)) => Ok(b.encode(t)),
            _ => Err(Error::config("encoder", "encoder does not accept this kind of sample")),
        }
    }

    /// Encodes an image without admitting tokens.
    pub fn encode_image(&self, img: &GrayImage) -> Result<Hypervector> {
        match self {
            Encoder::Image(e) => e.encode(img),
            Encoder::Vanilla {
                num_features,
                binarize_threshold: Some(t),
            } => {
                if img.pixels.len() != *num_features {
                    return Err(Error::DimensionMismatch {
                        expected: *num_features,
                        found: img.pixels.len(),
                    });
                }
                encode_vanilla(&binarize(img, *t))
            }
            _ => Err(Error::config("encoder", "encoder does not accept images")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::bundle;

    fn img(rows: usize, cols: usize, on: &[(usize, usize)]) -> GrayImage {
        let mut px = vec![0u8; rows * cols];
        for &(r, c) in on {
            px[r * cols + c] = 255;
        }
        GrayImage::new(rows, cols, px).unwrap()
    }

    #[test]
    fn vanilla() {
        let v = encode_vanilla(&[true, false, true]).unwrap();
        assert_eq!((v.size(), v.positions()), (3, vec![0, 2]));
        assert!(encode_vanilla(&[]).is_err());
    }

    #[test]
    fn single_pixel_image() {
        let mut spec = ImageEncoderSpec::content_addressed(256, 4, 3);
        spec.patch_height = 1;
        spec.patch_width = 1;
        let enc = ImageEncoder::new(spec, 1, 1).unwrap();
        let v = enc.encode(&img(1, 1, &[(0, 0)])).unwrap();
        let expected = bundle([
            &enc.patch_codebook().derive("1"),
            &enc.row_codebook().get("0").unwrap().rotate(1),
            &enc.col_codebook().get("0").unwrap().rotate(2),
        ])
        .unwrap();
        assert_eq!(v, expected);
        assert!(v.popcount() <= 3 * 4);
    }

    #[test]
    fn all_zero_image_uses_one_content_token() {
        let mut spec = ImageEncoderSpec::content_addressed(512, 4, 1);
        spec.patch_height = 2;
        spec.patch_width = 2;
        let enc = ImageEncoder::new(spec, 4, 4).unwrap();
        let v = enc.encode(&img(4, 4, &[])).unwrap();
        let zero = enc.patch_codebook().derive("0");
        let mut expected = zero.clone();
        for (_, r) in enc.row_codebook().iter() {
            expected.or_assign(&r.rotate(1)).unwrap();
        }
        for (_, c) in enc.col_codebook().iter() {
            expected.or_assign(&c.rotate(2)).unwrap();
        }
        assert_eq!(v, expected);
    }

    #[test]
    fn patch_ids() {
        let mut spec = ImageEncoderSpec::content_addressed(64, 2, 0);
        spec.patch_height = 2;
        spec.patch_width = 3;
        let enc = ImageEncoder::new(spec, 2, 3).unwrap();
        let bits = binarize(&img(2, 3, &[(0, 0), (1, 2)]), 75);
        // 100 001 -> 0b10_0001 -> padded to 8 bits -> "21"
        assert_eq!(enc.patch_id(&bits, 0, 0), ("21".to_string(), true));
    }

    #[test]
    fn same_content_different_position() {
        for spec in [
            ImageEncoderSpec::new(2048, 4, 7),
            ImageEncoderSpec {
                patch_height: 1,
                patch_width: 1,
                ..ImageEncoderSpec::content_addressed(2048, 4, 7)
            },
        ] {
            let enc = ImageEncoder::new(spec, 28, 28).unwrap();
            let a = enc.position_hv("1", 5, 3).unwrap();
            let b = enc.position_hv("1", 10, 4).unwrap();
            assert_ne!(a, b);
            assert!(a.overlap(&b).unwrap() <= 4);
        }
        let enc = ImageEncoder::new(ImageEncoderSpec::new(64, 2, 0), 3, 3).unwrap();
        assert!(matches!(enc.position_hv("1", 3, 0), Err(Error::UnknownToken(_))));
    }

    #[test]
    fn image_popcount_bound_and_purity() {
        let enc = ImageEncoder::new(ImageEncoderSpec::new(1024, 4, 2), 6, 6).unwrap();
        let im = img(6, 6, &[(0, 0), (2, 3), (5, 5)]);
        let v = enc.encode(&im).unwrap();
        assert!(v.popcount() <= 4 * 3 * 3);
        let mut admitting = enc.clone();
        assert_eq!(admitting.encode_admit(&im).unwrap(), v);
        assert_eq!(admitting.patch_codebook().len(), 1);
    }

    #[test]
    fn patch_larger_than_image() {
        let spec = ImageEncoderSpec::content_addressed(64, 2, 0);
        assert!(ImageEncoder::new(spec, 5, 5).is_err());
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("Hello, World!  it's"), vec!["hello", "world", "its"]);
        assert!(tokenize(" ... ").is_empty());
    }

    #[test]
    fn text_bag_semantics() {
        let mut enc = TextEncoder::new(512, 4, 1).unwrap();
        let ab = enc.encode_admit("a b");
        let a = enc.vocabulary().get("a").unwrap().clone();
        let b = enc.vocabulary().get("b").unwrap().clone();
        assert_eq!(ab, bundle([&a, &b]).unwrap());
        assert_eq!(enc.encode("a a a"), a);
        assert_eq!(enc.encode("b a"), ab);
        assert!(enc.encode("unseen words").is_zero());
        assert!(enc.encode("").is_zero());
    }

    #[test]
    fn fingerprint() {
        let enc = FingerprintEncoder::new(128, 512, 4, 0).unwrap();
        assert_eq!(enc.codebook().len(), 128);
        assert!(enc.encode(&[]).unwrap().is_zero());
        assert_eq!(&enc.encode(&[5]).unwrap(), enc.codebook().get("5").unwrap());
        assert!(enc.encode(&[5, 100]).unwrap().popcount() <= 8);
        assert!(matches!(enc.encode(&[128]), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn bag_of_words() {
        let b = BagOfWords::new(vec!["good".into(), "bad".into()]);
        assert_eq!(b.encode("Good, not BAD").positions(), vec![0, 1]);
        assert_eq!(b.encode("fine").popcount(), 0);
        let e = Encoder::BagOfWords(b);
        let back: Encoder = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn encoder_serde_round_trip() {
        let mut img_enc = ImageEncoder::new(ImageEncoderSpec::new(256, 3, 4), 4, 4).unwrap();
        let im = img(4, 4, &[(1, 1), (2, 2)]);
        let v = img_enc.encode_admit(&im).unwrap();
        let e = Encoder::Image(img_enc);
        let s = serde_json::to_string(&e).unwrap();
        let back: Encoder = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let Encoder::Image(b) = back else { unreachable!() };
        assert_eq!(b.encode(&im).unwrap(), v);
    }
}
