//! File formats: PNG for display images, Radiance RGBE and PFM for
//! radiance maps, JSON for manifests, CRF tables and reports.
//!
//! Radiance maps are log-valued in memory and linear on disk.

mod manifest;
mod pfm;
mod png;
mod rgbe;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::RadianceMap;

pub use self::manifest::{load_stack, read_manifest, write_manifest, ManifestEntry, StackManifest};
pub use self::png::{read_ldr, read_text_chunk, write_ldr, write_ldr_with_text};

/// Linear radiance below this is stored as this value before taking logs.
pub const LINEAR_FLOOR: f64 = 1e-12;

/// Linear float RGB raster as stored in HDR files.
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 3]>,
}

impl HdrImage {
    pub fn from_radiance(map: &RadianceMap) -> Self {
        HdrImage {
            width: map.width(),
            height: map.height(),
            data: map.log_pixels().iter().map(|px| px.map(|y| y.exp() as f32)).collect(),
        }
    }

    pub fn to_radiance(&self) -> Result<RadianceMap> {
        if let Some(i) = self.data.iter().position(|px| px.iter().any(|v| !v.is_finite())) {
            return Err(Error::InputDomain(format!(
                "pixel {i} ({}, {}) = {:?} is not finite",
                i % self.width,
                i / self.width,
                self.data[i]
            )));
        }
        let data = self
            .data
            .iter()
            .map(|px| px.map(|v| (v as f64).max(LINEAR_FLOOR).ln()))
            .collect();
        RadianceMap::new(self.width, self.height, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdrFormat {
    Rgbe,
    Pfm,
}

impl HdrFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("hdr") | Some("pic") | Some("rgbe") => Ok(HdrFormat::Rgbe),
            Some("pfm") => Ok(HdrFormat::Pfm),
            _ => Err(Error::format(path, "unknown HDR extension, expected .hdr or .pfm")),
        }
    }
}

pub fn read_hdr_image(path: impl AsRef<Path>) -> Result<HdrImage> {
    let path = path.as_ref();
    let format = HdrFormat::from_path(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        HdrFormat::Rgbe => rgbe::decode(reader),
        HdrFormat::Pfm => pfm::decode(reader),
    }
    .map_err(|msg| Error::format(path, msg))
}

pub fn write_hdr_image(image: &HdrImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = HdrFormat::from_path(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = BufWriter::new(file);
    match format {
        HdrFormat::Rgbe => rgbe::encode(image, writer),
        HdrFormat::Pfm => pfm::encode(image, writer),
    }
    .map_err(|e| Error::io(path, e))
}

/// Reads a radiance map; the format follows the file extension.
pub fn read_hdr(path: impl AsRef<Path>) -> Result<RadianceMap> {
    let path = path.as_ref();
    read_hdr_image(path)?.to_radiance().map_err(|e| match e {
        Error::InputDomain(msg) => Error::format(path, msg),
        other => other,
    })
}

pub fn write_hdr(map: &RadianceMap, path: impl AsRef<Path>) -> Result<()> {
    write_hdr_image(&HdrImage::from_radiance(map), path)
}

/// In-memory codecs, mostly for tests and the C ABI.
pub fn encode_hdr(image: &HdrImage, format: HdrFormat) -> Vec<u8> {
    let mut out = Vec::new();
    match format {
        HdrFormat::Rgbe => rgbe::encode(image, &mut out),
        HdrFormat::Pfm => pfm::encode(image, &mut out),
    }
    .expect("writing to memory");
    out
}

pub fn decode_hdr(bytes: &[u8], format: HdrFormat) -> Result<HdrImage> {
    match format {
        HdrFormat::Rgbe => rgbe::decode(bytes),
        HdrFormat::Pfm => pfm::decode(bytes),
    }
    .map_err(|msg| Error::format("<memory>", msg))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, format!("invalid JSON: {e}")))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
