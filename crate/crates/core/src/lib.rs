//! Multi-exposure fusion with hue compensation.
//!
//! The pipeline fuses an exposure stack into a display image, recovers a
//! radiance map through an estimated inverse camera response, and replaces
//! the hue of every fused pixel by the hue of the radiance map on its
//! constant-hue plane.

pub mod cli;
pub mod crf;
pub mod error;
pub mod fusion;
pub mod hdr;
pub mod hueplane;
pub mod image;
pub mod io;
pub mod isotonic;
pub mod metrics;
pub mod pyramid;

pub use error::{Error, ErrorKind, Result};
pub use image::{CrfTable, ExposureStack, LdrImage, RadianceMap, Rgb};
