//! Versioned, checksummed model files.
//!
//! ```text
//! {"format":"hvtm-model","version":1,"sha256":"<hex>","payload":{...}}
//! ```
//!
//! The checksum covers the exact payload bytes as written. Automaton states
//! are stored per bank as base64 of the raw state bytes (clause-major,
//! literal-minor), which keeps files compact and round trips exact.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::data::dataset::sha256_hex;
use crate::encoders::Encoder;
use crate::error::{Error, Result};
use crate::tm::{ClauseBank, MachineKind, TMConfig, TsetlinMachine};

pub const MODEL_FORMAT: &str = "hvtm-model";
pub const MODEL_VERSION: u32 = 1;

/// A trained machine together with the encoder that feeds it.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub machine: TsetlinMachine,
    pub encoder: Encoder,
    pub class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct BankRecord {
    num_clauses: usize,
    states: String,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    config: TMConfig,
    kind: MachineKind,
    epochs_trained: u64,
    class_names: Vec<String>,
    encoder: Encoder,
    banks: Vec<BankRecord>,
}

#[derive(Serialize)]
struct FileOut<'a> {
    format: &'a str,
    version: u32,
    sha256: String,
    payload: &'a RawValue,
}

#[derive(Deserialize)]
struct FileIn<'a> {
    format: String,
    version: u32,
    sha256: String,
    #[serde(borrow)]
    payload: &'a RawValue,
}

impl Model {
    pub fn new(machine: TsetlinMachine, encoder: Encoder, class_names: Vec<String>) -> Result<Self> {
        if encoder.output_size() != machine.config().num_features {
            return Err(Error::DimensionMismatch {
                expected: machine.config().num_features,
                found: encoder.output_size(),
            });
        }
        Ok(Self {
            machine,
            encoder,
            class_names,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let m = &self.machine;
        let payload = Payload {
            config: m.config().clone(),
            kind: m.kind(),
            epochs_trained: m.epochs_trained(),
            class_names: self.class_names.clone(),
            encoder: self.encoder.clone(),
            banks: m
                .banks()
                .iter()
                .map(|b| BankRecord {
                    num_clauses: b.num_clauses(),
                    states: B64.encode(b.states()),
                })
                .collect(),
        };
        let raw = serde_json::value::to_raw_value(&payload)?;
        Ok(serde_json::to_string(&FileOut {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            sha256: sha256_hex(raw.get().as_bytes()),
            payload: &raw,
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: FileIn = serde_json::from_str(s)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Malformed(format!(
                "not a model file (format `{}`)",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "model",
                found: file.version,
                supported: MODEL_VERSION,
            });
        }
        let actual = sha256_hex(file.payload.get().as_bytes());
        if actual != file.sha256 {
            return Err(Error::Checksum {
                expected: file.sha256,
                actual,
            });
        }
        let p: Payload = serde_json::from_str(file.payload.get())?;
        let banks = p
            .banks
            .into_iter()
            .map(|b| {
                let states = B64
                    .decode(b.states.as_bytes())
                    .map_err(|e| Error::Malformed(format!("bank states: {e}")))?;
                ClauseBank::from_states(
                    b.num_clauses,
                    p.config.num_features,
                    p.config.states_per_action,
                    states,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let machine = TsetlinMachine::from_parts(p.config, p.kind, banks, p.epochs_trained)?;
        Self::new(machine, p.encoder, p.class_names)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
