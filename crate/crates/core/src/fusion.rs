//! Exposure fusion: per-pixel quality weights blended through Laplacian
//! pyramids.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{luma, ExposureStack, LdrImage, Rgb};
use crate::pyramid::{auto_depth, collapse, gaussian_pyramid, laplacian_pyramid, reflect101, Plane};

/// Floor added to every raw weight.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionWeights {
    pub contrast: f64,
    pub saturation: f64,
    pub exposedness: f64,
    /// Width of the well-exposedness Gaussian around 0.5.
    pub sigma: f64,
    /// Pyramid depth; `None` or anything deeper than the image allows means
    /// the automatic depth.
    pub depth: Option<usize>,
}

impl Default for FusionWeights {
    fn default() -> Self {
        FusionWeights {
            contrast: 1.0,
            saturation: 1.0,
            exposedness: 1.0,
            sigma: 0.2,
            depth: None,
        }
    }
}

impl FusionWeights {
    pub fn validate(&self) -> Result<()> {
        let exps = [self.contrast, self.saturation, self.exposedness];
        if exps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config(format!("fusion exponents must be >= 0, got {exps:?}")));
        }
        if exps.iter().all(|&e| e == 0.0) {
            return Err(Error::Config("at least one fusion exponent must be positive".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    fn depth_for(&self, width: usize, height: usize) -> usize {
        let auto = auto_depth(width, height);
        self.depth.map_or(auto, |d| d.min(auto))
    }
}

/// Result of a fusion together with how much the final clamp moved values.
#[derive(Debug, Clone)]
pub struct FusionOutput {
    pub image: LdrImage,
    /// Largest distance any channel was moved by the clamp to [0,1].
    pub max_clamp: f64,
    pub clamped_values: usize,
}

fn contrast_map(image: &LdrImage) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let gray: Vec<f64> = image.pixels().iter().map(luma).collect();
    let at = |x: isize, y: isize| gray[reflect101(y, h) * w + reflect101(x, w)];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let lap = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * at(x, y);
            out.push(lap.abs());
        }
    }
    out
}

fn saturation(px: &Rgb) -> f64 {
    let mean = (px[0] + px[1] + px[2]) / 3.0;
    (px.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt()
}

fn exposedness(px: &Rgb, sigma: f64) -> f64 {
    let denom = 2.0 * sigma * sigma;
    px.iter().map(|v| (-(v - 0.5).powi(2) / denom).exp()).product()
}

fn raw_weights(image: &LdrImage, w: &FusionWeights) -> Vec<f64> {
    let contrast = contrast_map(image);
    image
        .pixels()
        .iter()
        .zip(contrast)
        .map(|(px, c)| {
            c.powf(w.contrast) * saturation(px).powf(w.saturation) * exposedness(px, w.sigma).powf(w.exposedness)
                + WEIGHT_FLOOR
        })
        .collect()
}

/// Normalized weight maps, one per exposure, summing to one at every pixel.
pub fn quality_weights(stack: &ExposureStack, w: &FusionWeights) -> Result<Vec<Vec<f64>>> {
    w.validate()?;
    let mut maps: Vec<Vec<f64>> = stack.images().par_iter().map(|im| raw_weights(im, w)).collect();
    let count = stack.width() * stack.height();
    for i in 0..count {
        let total: f64 = maps.iter().map(|m| m[i]).sum();
        for m in maps.iter_mut() {
            m[i] /= total;
        }
    }
    Ok(maps)
}

pub fn fuse(stack: &ExposureStack, w: &FusionWeights) -> Result<LdrImage> {
    fuse_with_stats(stack, w).map(|out| out.image)
}

pub fn fuse_with_stats(stack: &ExposureStack, w: &FusionWeights) -> Result<FusionOutput> {
    let weights = quality_weights(stack, w)?;
    let (width, height) = (stack.width(), stack.height());
    let depth = w.depth_for(width, height);

    // per exposure: (weight pyramid, three channel pyramids)
    let pyramids: Vec<(Vec<Plane>, Vec<Vec<Plane>>)> = stack
        .images()
        .par_iter()
        .zip(weights.par_iter())
        .map(|(im, wmap)| {
            let gw = gaussian_pyramid(&Plane::new(width, height, wmap.clone()), depth);
            let lap = (0..3)
                .map(|ch| {
                    let plane = Plane::new(width, height, im.pixels().iter().map(|p| p[ch]).collect());
                    laplacian_pyramid(&plane, depth)
                })
                .collect();
            (gw, lap)
        })
        .collect();

    let mut channels = Vec::with_capacity(3);
    for ch in 0..3 {
        let mut blended: Vec<Plane> = pyramids[0].0.iter().map(|l| Plane::filled(l.width, l.height, 0.0)).collect();
        for (gw, lap) in &pyramids {
            for (k, level) in blended.iter_mut().enumerate() {
                for ((acc, wv), lv) in level.data.iter_mut().zip(&gw[k].data).zip(&lap[ch][k].data) {
                    *acc += wv * lv;
                }
            }
        }
        channels.push(collapse(&blended));
    }

    let mut max_clamp: f64 = 0.0;
    let mut clamped_values = 0;
    let data: Vec<Rgb> = (0..width * height)
        .map(|i| {
            [0, 1, 2].map(|ch| {
                let v = channels[ch].data[i];
                let c = v.clamp(0.0, 1.0);
                if c != v {
                    clamped_values += 1;
                    max_clamp = max_clamp.max((c - v).abs());
                }
                c
            })
        })
        .collect();
    debug!("fusion clamp: {clamped_values} values, max {max_clamp:.3e}");
    Ok(FusionOutput {
        image: LdrImage::from_clamped(width, height, data),
        max_clamp,
        clamped_values,
    })
}
