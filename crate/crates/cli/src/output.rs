use std::path::{Path, PathBuf};

use hvtm::data::{file_sha256, Manifest, SourceFile};
use hvtm::ErrorKind;
use serde::Serialize;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<hvtm::Error> for CliError {
    fn from(e: hvtm::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Internal => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        hvtm::Error::from(e).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        hvtm::Error::from(e).into()
    }
}

/// Everything needed to re-run a command. `--config` accepts this file.
#[derive(Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub tool_version: &'a str,
    pub config: &'a C,
    pub inputs: Vec<SourceFile>,
    pub data: Vec<Manifest>,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<SourceFile>,
}

impl<'a, C: Serialize> RunManifest<'a, C> {
    pub fn new(command: &'a str, config: &'a C) -> Self {
        Self {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
            inputs: Vec::new(),
            data: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_inputs(&mut self, paths: &[PathBuf]) -> Result<(), CliError> {
        for p in paths {
            self.inputs.push(SourceFile::new(p.clone(), file_sha256(p)?));
        }
        Ok(())
    }

    pub fn add_outputs(&mut self, dir: &Path, names: &[String]) -> Result<(), CliError> {
        for n in names {
            self.outputs
                .push(SourceFile::new(PathBuf::from(n), file_sha256(dir.join(n))?));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Creates `dir`, refusing paths that coincide with an input file.
pub fn prepare_out_dir(dir: &Path, inputs: &[PathBuf]) -> Result<(), CliError> {
    if inputs.iter().any(|p| p == dir) {
        return Err(CliError::usage(format!(
            "output directory {} is an input path",
            dir.display()
        )));
    }
    std::fs::create_dir_all(dir)?;
    Ok(())
}
