use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::png::read_ldr;
use crate::error::{Error, Result};
use crate::image::{ExposureStack, LdrImage};

fn default_base_time() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub ev: f64,
}

/// List of exposures of one scene. Relative paths are resolved against the
/// directory holding the manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    #[serde(default = "default_base_time")]
    pub base_time: f64,
    pub images: Vec<ManifestEntry>,
}

impl StackManifest {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.images {
            if !seen.insert(&entry.path) {
                return Err(Error::InvalidStack(format!(
                    "duplicate path {} in manifest",
                    entry.path.display()
                )));
            }
            if !entry.ev.is_finite() {
                return Err(Error::InvalidStack(format!(
                    "exposure value of {} is not finite",
                    entry.path.display()
                )));
            }
        }
        if !(self.base_time.is_finite() && self.base_time > 0.0) {
            return Err(Error::InvalidStack(format!("base_time {} must be positive", self.base_time)));
        }
        Ok(())
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<StackManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: StackManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(path, format!("invalid manifest: {e}")))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for entry in &mut manifest.images {
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    manifest.validate()?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &StackManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_stack(manifest: &StackManifest) -> Result<ExposureStack> {
    manifest.validate()?;
    let images: Vec<LdrImage> = manifest
        .images
        .par_iter()
        .map(|entry| read_ldr(&entry.path))
        .collect::<Result<_>>()?;
    if let Some(first) = images.first() {
        let offenders: Vec<String> = manifest
            .images
            .iter()
            .zip(&images)
            .filter(|(_, im)| !im.same_size(first.width(), first.height()))
            .map(|(e, im)| format!("{} ({}x{})", e.path.display(), im.width(), im.height()))
            .collect();
        if !offenders.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} like {}: {}",
                first.width(),
                first.height(),
                manifest.images[0].path.display(),
                offenders.join(", ")
            )));
        }
    }
    let evs = manifest.images.iter().map(|e| e.ev).collect();
    ExposureStack::new(images, evs, manifest.base_time)
}
