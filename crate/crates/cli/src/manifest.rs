//! Provenance manifests: what ran, with which settings, and hashes of what
//! it wrote. Paths are stored relative to the output directory so a re-run
//! elsewhere produces the same manifest.

use std::path::{Path, PathBuf};

use finray_core::render::RenderSettings;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderSettings>,
    /// `approximate-deformer` or `external-fem` when a deformed gel is involved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation_source: Option<String>,
    /// Command-specific inputs, sufficient to re-run the command.
    pub inputs: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Set when a command aborted after writing some outputs.
    #[serde(default)]
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn new(command: &str, inputs: impl Serialize) -> Result<Manifest> {
        Ok(Manifest {
            tool: "finray".into(),
            version: finray_core::VERSION.into(),
            command: command.into(),
            seed: None,
            render: None,
            deformation_source: None,
            inputs: serde_json::to_value(inputs).map_err(|e| CliError::Runtime(e.to_string()))?,
            notes: Vec::new(),
            partial: false,
            error: None,
            outputs: Vec::new(),
        })
    }

    pub fn with_render(mut self, settings: &RenderSettings) -> Manifest {
        self.seed = Some(settings.seed);
        self.render = Some(*settings);
        self
    }

    /// Hashes `dir/name` and lists it as an output.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let sha256 = sha256_file(&dir.join(name))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(manifest_name(&self.command));
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// `<command>.manifest.json`, so commands sharing an output directory keep
/// separate manifests.
pub fn manifest_name(command: &str) -> String {
    format!("{command}.manifest.json")
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}
