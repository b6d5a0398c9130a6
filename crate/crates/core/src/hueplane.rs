//! Constant-hue-plane decomposition and hue transplant.
//!
//! A pixel `x` in the RGB cube lies on the triangle spanned by white
//! `(1,1,1)`, black `(0,0,0)` and its maximally saturated color `c`:
//!
//! ```text
//! x = a_w·w + a_k·k + a_c·c,   a_w = min(x), a_c = max(x) − min(x), a_k = 1 − max(x)
//! ```
//!
//! Compensation keeps `a_w` and `a_c` of the fused pixel and swaps in the
//! maximally saturated color taken from the radiance map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{LdrImage, RadianceMap, Rgb};

/// Exponent of the optional display-gamma pre-transform on radiance.
pub const DISPLAY_GAMMA: f64 = 2.2;

/// Where the hue of a radiance pixel is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HueDomain {
    /// Linear radiance `exp(y)`.
    #[default]
    Linear,
    /// `exp(y)^(1/2.2)`.
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuePlaneCoords {
    pub a_w: f64,
    pub a_k: f64,
    pub a_c: f64,
    /// Maximally saturated color; all zeros when the hue is undefined.
    pub c: Rgb,
    pub defined: bool,
}

impl HuePlaneCoords {
    /// `a_w·(1,1,1) + a_c·c` with no clamping.
    pub fn recompose_with(&self, c: &Rgb) -> Rgb {
        c.map(|cl| self.a_w + self.a_c * cl)
    }

    pub fn recompose(&self) -> Rgb {
        self.recompose_with(&self.c)
    }
}

fn check_unit_cube(x: &Rgb) -> Result<()> {
    if x.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::InputDomain(format!("pixel {x:?} outside [0,1]^3")))
    }
}

fn extrema(x: &Rgb) -> (f64, f64) {
    let max = x[0].max(x[1]).max(x[2]);
    let min = x[0].min(x[1]).min(x[2]);
    (min, max)
}

/// `c_l = (x_l − min x) / (max x − min x)`, or `None` for achromatic pixels.
///
/// Defined for any finite triplet; only the [0,1] cube has a geometric
/// meaning, but radiance pixels go through here too.
pub fn max_sat_color(x: &Rgb) -> Option<Rgb> {
    let (min, max) = extrema(x);
    let range = max - min;
    if !(range > 0.0) {
        return None;
    }
    let mut c = x.map(|v| (v - min) / range);
    // exact 0 and 1 at the extreme channels
    for (cl, &v) in c.iter_mut().zip(x) {
        if v == max {
            *cl = 1.0;
        } else if v == min {
            *cl = 0.0;
        }
    }
    Some(c)
}

pub fn decompose(x: &Rgb) -> Result<HuePlaneCoords> {
    check_unit_cube(x)?;
    Ok(decompose_unchecked(x))
}

fn decompose_unchecked(x: &Rgb) -> HuePlaneCoords {
    let (min, max) = extrema(x);
    match max_sat_color(x) {
        Some(c) => HuePlaneCoords {
            a_w: min,
            a_k: 1.0 - max,
            a_c: max - min,
            c,
            defined: true,
        },
        None => HuePlaneCoords {
            a_w: min,
            a_k: 1.0 - min,
            a_c: 0.0,
            c: [0.0; 3],
            defined: false,
        },
    }
}

/// Replaces the hue of `x_f` by `c_h`, keeping its white and chroma weights.
///
/// Returns `x_f` unchanged when either hue is undefined.
pub fn compensate_pixel(x_f: &Rgb, c_h: Option<&Rgb>) -> Result<Rgb> {
    check_unit_cube(x_f)?;
    if let Some(c) = c_h {
        check_unit_cube(c)?;
    }
    Ok(compensate_unchecked(x_f, c_h))
}

#[inline]
fn compensate_unchecked(x_f: &Rgb, c_h: Option<&Rgb>) -> Rgb {
    let coords = decompose_unchecked(x_f);
    match c_h {
        Some(c) if coords.defined => coords.recompose_with(c).map(|v| v.clamp(0.0, 1.0)),
        _ => *x_f,
    }
}

/// Hue of one radiance pixel given as log values.
///
/// Works on `exp(y − max y)` so that very bright or very dark pixels do not
/// overflow; the maximally saturated color is invariant to that scale.
pub fn radiance_hue(log_px: &Rgb, domain: HueDomain) -> Option<Rgb> {
    let k = match domain {
        HueDomain::Linear => 1.0,
        HueDomain::Gamma => 1.0 / DISPLAY_GAMMA,
    };
    let y = log_px.map(|v| v * k);
    let top = y[0].max(y[1]).max(y[2]);
    max_sat_color(&y.map(|v| (v - top).exp()))
}

/// Per-pixel hue transplant from `hdr` into `fused`.
pub fn compensate_image(fused: &LdrImage, hdr: &RadianceMap, domain: HueDomain) -> Result<LdrImage> {
    if !hdr.same_size(fused.width(), fused.height()) {
        return Err(Error::DimensionMismatch(format!(
            "fused image is {}x{}, radiance map is {}x{}",
            fused.width(),
            fused.height(),
            hdr.width(),
            hdr.height()
        )));
    }
    let data: Vec<Rgb> = fused
        .pixels()
        .par_iter()
        .zip(hdr.log_pixels().par_iter())
        .map(|(x_f, y)| compensate_unchecked(x_f, radiance_hue(y, domain).as_ref()))
        .collect();
    Ok(LdrImage::from_clamped(fused.width(), fused.height(), data))
}
