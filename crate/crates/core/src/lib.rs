//! Hypervector Tsetlin Machine.
//!
//! Sparse binary hypervectors ([`hv`], [`codebook`]) turn images, text and
//! molecular fingerprints into fixed-width Boolean inputs ([`encoders`]) for a
//! Tsetlin Machine ([`tm`]). Trained clauses can be decoded back into the
//! tokens they test for ([`explain`]).

pub mod codebook;
pub mod data;
pub mod encoders;
pub mod explain;
pub mod error;
pub mod experiment;
pub mod hv;
pub mod rng;
pub mod tm;

pub use codebook::TokenCodebook;
pub use data::{Dataset, GrayImage, Model, RunRecord};
pub use encoders::{Encoder, FingerprintEncoder, ImageEncoder, ImageEncoderSpec, TextEncoder};
pub use error::{Error, ErrorKind, Result};
pub use hv::{bind_role, bundle, capacity, overlap_likelihood, Hypervector};
pub use tm::{Metrics, TMConfig, TsetlinMachine};
