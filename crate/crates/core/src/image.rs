//! Image, exposure-stack, radiance-map and CRF-table types.
//!
//! Every constructor validates its invariants, so a value of one of these
//! types can be handed to any algorithm without re-checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One RGB pixel, channel order r, g, b.
pub type Rgb = [f64; 3];

/// Number of quantization levels of the CRF code domain.
pub const LEVELS: usize = 256;

/// Code whose inverse-CRF value is pinned to zero.
pub const GAUGE_CODE: usize = 128;

/// Rec. 709 luma weights, used wherever a grayscale value is needed.
pub const LUMA: Rgb = [0.2126, 0.7152, 0.0722];

pub fn luma(px: &Rgb) -> f64 {
    LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2]
}

/// Maps `v` in [0,1] to a code in `0..levels`, rounding half up.
pub fn quantize(v: f64, levels: usize) -> Result<usize> {
    if levels < 2 {
        return Err(Error::InputDomain(format!("levels must be >= 2, got {levels}")));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InputDomain(format!("channel value {v} outside [0,1]")));
    }
    Ok(quantize_unchecked(v, levels))
}

#[inline]
pub(crate) fn quantize_unchecked(v: f64, levels: usize) -> usize {
    let max = (levels - 1) as f64;
    ((v * max + 0.5).floor() as usize).min(levels - 1)
}

/// 8-bit code of a channel value already known to be in [0,1].
#[inline]
pub(crate) fn code8(v: f64) -> usize {
    quantize_unchecked(v, LEVELS)
}

pub fn dequantize(code: usize, levels: usize) -> f64 {
    code as f64 / (levels - 1) as f64
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InputDomain(format!("empty image {width}x{height}")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::DimensionMismatch(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width * height
        )));
    }
    Ok(())
}

/// Display-referred RGB image with every channel in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct LdrImage {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

impl LdrImage {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some((i, px)) = data
            .iter()
            .enumerate()
            .find(|(_, px)| px.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            return Err(Error::InputDomain(format!(
                "pixel {i} = {px:?} has a channel outside [0,1]"
            )));
        }
        Ok(LdrImage {
            width,
            height,
            data,
        })
    }

    /// Builds an image from a per-pixel function; values are clamped to [0,1].
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }));
            }
        }
        Self::new(width, height, data)
    }

    /// Caller guarantees the channel range; only used on values produced by clamping.
    pub(crate) fn from_clamped(width: usize, height: usize, data: Vec<Rgb>) -> Self {
        debug_assert_eq!(width * height, data.len());
        debug_assert!(data.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        LdrImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.data[y * self.width + x]
    }

    pub fn same_size(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }

    /// 8-bit codes, row-major, interleaved RGB.
    pub fn to_codes(&self) -> Vec<u8> {
        self.data
            .iter()
            .flat_map(|px| px.map(|v| code8(v) as u8))
            .collect()
    }

    pub fn from_codes(width: usize, height: usize, codes: &[u8]) -> Result<Self> {
        if codes.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} RGB image needs {} codes, got {}",
                width * height * 3,
                codes.len()
            )));
        }
        let data = codes
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]].map(|z| f64::from(z) / 255.0))
            .collect();
        Self::new(width, height, data)
    }

    /// Number of pixels with at least one channel at code 0 or 255.
    pub fn clipped_pixels(&self) -> usize {
        self.data
            .iter()
            .filter(|px| px.iter().any(|&v| matches!(code8(v), 0 | 255)))
            .count()
    }
}

/// Registered LDR exposures of one scene, sorted by exposure value.
#[derive(Debug, Clone)]
pub struct ExposureStack {
    images: Vec<LdrImage>,
    evs: Vec<f64>,
    base_time: f64,
}

impl ExposureStack {
    /// Images are reordered by ascending EV. Exposure time of image j is
    /// `base_time * 2^ev_j`.
    pub fn new(images: Vec<LdrImage>, evs: Vec<f64>, base_time: f64) -> Result<Self> {
        if images.len() != evs.len() {
            return Err(Error::InvalidStack(format!(
                "{} images but {} exposure values",
                images.len(),
                evs.len()
            )));
        }
        if images.len() < 2 {
            return Err(Error::InvalidStack(format!(
                "need at least 2 exposures, got {}",
                images.len()
            )));
        }
        if !(base_time.is_finite() && base_time > 0.0) {
            return Err(Error::InvalidStack(format!("base time {base_time} must be positive")));
        }
        if let Some(ev) = evs.iter().find(|ev| !ev.is_finite()) {
            return Err(Error::InvalidStack(format!("exposure value {ev} is not finite")));
        }
        let (w, h) = (images[0].width, images[0].height);
        let offenders: Vec<String> = images
            .iter()
            .enumerate()
            .filter(|(_, im)| !im.same_size(w, h))
            .map(|(i, im)| format!("#{i} is {}x{}", im.width, im.height))
            .collect();
        if !offenders.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "stack images must all be {w}x{h}: {}",
                offenders.join(", ")
            )));
        }

        let mut order: Vec<usize> = (0..evs.len()).collect();
        order.sort_by(|&a, &b| evs[a].total_cmp(&evs[b]));
        if let Some(pair) = order.windows(2).find(|p| evs[p[0]] == evs[p[1]]) {
            return Err(Error::InvalidStack(format!(
                "duplicate exposure value {} (images #{} and #{})",
                evs[pair[0]], pair[0], pair[1]
            )));
        }
        let mut slots: Vec<Option<LdrImage>> = images.into_iter().map(Some).collect();
        let images = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        let evs = order.iter().map(|&i| evs[i]).collect();
        Ok(ExposureStack {
            images,
            evs,
            base_time,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[LdrImage] {
        &self.images
    }

    pub fn evs(&self) -> &[f64] {
        &self.evs
    }

    pub fn base_time(&self) -> f64 {
        self.base_time
    }

    pub fn width(&self) -> usize {
        self.images[0].width
    }

    pub fn height(&self) -> usize {
        self.images[0].height
    }

    pub fn exposure_time(&self, j: usize) -> f64 {
        self.base_time * self.evs[j].exp2()
    }

    /// `ln Δt_j`.
    pub fn log_time(&self, j: usize) -> f64 {
        self.base_time.ln() + self.evs[j] * std::f64::consts::LN_2
    }

    /// Index of the middle exposure (the EV-0 image for symmetric stacks).
    pub fn middle(&self) -> usize {
        self.images.len() / 2
    }
}

/// Scene-referred image holding natural-log radiance per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceMap {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

impl RadianceMap {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some((i, px)) = data
            .iter()
            .enumerate()
            .find(|(_, px)| px.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InputDomain(format!(
                "log radiance at pixel {i} = {px:?} is not finite"
            )));
        }
        Ok(RadianceMap {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn log_pixels(&self) -> &[Rgb] {
        &self.data
    }

    pub fn same_size(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }

    /// Linear radiance `exp(y)` per channel.
    pub fn linear_pixels(&self) -> Vec<Rgb> {
        self.data.iter().map(|px| px.map(f64::exp)).collect()
    }

    /// Adds `offset` to every log value (a global exposure scale by `e^offset`).
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.data.iter().map(|px| px.map(|v| v + offset)).collect(),
        )
    }
}

/// Per-channel inverse camera response: 8-bit code to natural-log exposure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CrfTableJson", into = "CrfTableJson")]
pub struct CrfTable {
    channels: [Vec<f64>; 3],
}

impl CrfTable {
    pub fn new(channels: [Vec<f64>; 3]) -> Result<Self> {
        for (name, table) in ["r", "g", "b"].iter().zip(&channels) {
            if table.len() != LEVELS {
                return Err(Error::InvalidCrf(format!(
                    "channel {name} has {} entries, expected {LEVELS}",
                    table.len()
                )));
            }
            if let Some(z) = table.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidCrf(format!("channel {name} is not finite at code {z}")));
            }
            if let Some(z) = table.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::InvalidCrf(format!(
                    "channel {name} decreases between codes {z} and {}",
                    z + 1
                )));
            }
            if table[GAUGE_CODE] != 0.0 {
                return Err(Error::InvalidCrf(format!(
                    "channel {name} has value {} at code {GAUGE_CODE}, expected 0",
                    table[GAUGE_CODE]
                )));
            }
        }
        Ok(CrfTable { channels })
    }

    /// Looks up `g⁻¹(code)` for one channel.
    #[inline]
    pub fn log_exposure(&self, channel: usize, code: usize) -> f64 {
        self.channels[channel][code]
    }

    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.channels[channel]
    }
}

#[derive(Serialize, Deserialize)]
struct CrfTableJson {
    levels: usize,
    r: Vec<f64>,
    g: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<CrfTableJson> for CrfTable {
    type Error = Error;

    fn try_from(json: CrfTableJson) -> Result<Self> {
        if json.levels != LEVELS {
            return Err(Error::InvalidCrf(format!(
                "levels = {}, only {LEVELS} is supported",
                json.levels
            )));
        }
        CrfTable::new([json.r, json.g, json.b])
    }
}

impl From<CrfTable> for CrfTableJson {
    fn from(t: CrfTable) -> Self {
        let [r, g, b] = t.channels;
        CrfTableJson {
            levels: LEVELS,
            r,
            g,
            b,
        }
    }
}
