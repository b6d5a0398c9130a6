//! Radiance recovery from an exposure stack, and forward rendering of
//! synthetic stacks from a known radiance map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crf::weight;
use crate::error::{Error, Result};
use crate::image::{code8, dequantize, luma, CrfTable, ExposureStack, LdrImage, RadianceMap, Rgb, LEVELS};

/// Code the median scene luminance lands on in the EV-0 render.
pub const ANCHOR_CODE: usize = 118;

/// Weighted average of `g⁻¹(z_j) − ln Δt_j` for one channel of one pixel.
///
/// When every code has zero weight, falls back to the exposure at
/// `fallback` alone.
pub fn merge_channel(codes: &[usize], log_times: &[f64], table: &[f64], fallback: usize) -> f64 {
    debug_assert_eq!(codes.len(), log_times.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (&z, &lt) in codes.iter().zip(log_times) {
        let w = weight(z);
        num += w * (table[z] - lt);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        table[codes[fallback]] - log_times[fallback]
    }
}

pub fn recover_radiance(stack: &ExposureStack, crf: &CrfTable) -> Result<RadianceMap> {
    let (w, h) = (stack.width(), stack.height());
    let n = stack.len();
    let log_times: Vec<f64> = (0..n).map(|j| stack.log_time(j)).collect();
    let mid = stack.middle();
    let data: Vec<Rgb> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let mut out = [0.0; 3];
            let mut codes = vec![0usize; n];
            for (ch, y) in out.iter_mut().enumerate() {
                for (code, im) in codes.iter_mut().zip(stack.images()) {
                    *code = code8(im.pixels()[i][ch]);
                }
                *y = merge_channel(&codes, &log_times, crf.channel(ch), mid);
            }
            out
        })
        .collect();
    RadianceMap::new(w, h, data)
}

/// Forward camera model used to render synthetic stacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    /// Display gamma: code = clip(q^(1/gamma)).
    pub gamma: f64,
    /// Global exposure scale `s`; `None` anchors the median luminance at
    /// [`ANCHOR_CODE`].
    pub scale: Option<f64>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            gamma: 2.2,
            scale: None,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if let Some(s) = self.scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Config(format!("exposure scale must be positive, got {s}")));
            }
        }
        Ok(())
    }

    /// The scale `s` actually used for `ground_truth`.
    pub fn resolve_scale(&self, ground_truth: &RadianceMap) -> Result<f64> {
        self.validate()?;
        Ok(match self.scale {
            Some(s) => s,
            None => anchor_scale(ground_truth, self.gamma),
        })
    }
}

/// Scale that puts the median luminance of `ground_truth` at code
/// [`ANCHOR_CODE`] after gamma encoding.
pub fn anchor_scale(ground_truth: &RadianceMap, gamma: f64) -> f64 {
    let mut lum: Vec<f64> = ground_truth
        .log_pixels()
        .iter()
        .map(|px| luma(&px.map(f64::exp)))
        .collect();
    let mid = lum.len() / 2;
    let (_, median, _) = lum.select_nth_unstable_by(mid, f64::total_cmp);
    let target = dequantize(ANCHOR_CODE, LEVELS).powf(gamma);
    if *median > 0.0 {
        target / *median
    } else {
        1.0
    }
}

fn render(ground_truth: &RadianceMap, exposure: f64, gamma: f64) -> LdrImage {
    let data = ground_truth
        .log_pixels()
        .par_iter()
        .map(|px| {
            px.map(|y| {
                let q = y.exp() * exposure;
                let v = q.powf(1.0 / gamma).clamp(0.0, 1.0);
                dequantize(code8(v), LEVELS)
            })
        })
        .collect();
    LdrImage::from_clamped(ground_truth.width(), ground_truth.height(), data)
}

/// Renders one 8-bit capture per exposure value.
pub fn synth_stack(ground_truth: &RadianceMap, evs: &[f64], opts: &RenderOptions) -> Result<ExposureStack> {
    if evs.is_empty() {
        return Err(Error::InvalidStack("empty exposure value list".into()));
    }
    let scale = opts.resolve_scale(ground_truth)?;
    let images = evs
        .iter()
        .map(|ev| render(ground_truth, scale * ev.exp2(), opts.gamma))
        .collect();
    ExposureStack::new(images, evs.to_vec(), 1.0)
}

/// Display rendering of the ground truth with the same camera model at EV 0.
pub fn render_reference(ground_truth: &RadianceMap, opts: &RenderOptions) -> Result<LdrImage> {
    let scale = opts.resolve_scale(ground_truth)?;
    Ok(render(ground_truth, scale, opts.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_table() -> Vec<f64> {
        (0..LEVELS).map(|z| (z as f64 - 128.0) / 32.0).collect()
    }

    #[test]
    fn single_exposure_is_table_lookup() {
        let t = ramp_table();
        for z in [1usize, 60, 128, 200, 254] {
            assert_eq!(merge_channel(&[z], &[0.0], &t, 0), t[z]);
        }
    }

    #[test]
    fn equal_codes_average_log_times() {
        let t = ramp_table();
        let lt = [0.0, 2f64.ln()];
        let y = merge_channel(&[90, 90], &lt, &t, 1);
        let expect = t[90] - (0.0 + 2f64.ln()) / 2.0;
        assert!((y - expect).abs() < 1e-15);
    }

    #[test]
    fn saturated_everywhere_uses_middle_exposure() {
        let t = ramp_table();
        let lt = [-1.0, 0.0, 1.0];
        assert_eq!(merge_channel(&[255, 255, 255], &lt, &t, 1), t[255] - 0.0);
        assert_eq!(merge_channel(&[0, 0, 0], &lt, &t, 2), t[0] - 1.0);
    }

    #[test]
    fn flat_field_renders_to_half() {
        let gt = RadianceMap::new(3, 2, vec![[0.0; 3]; 6]).unwrap();
        let opts = RenderOptions {
            gamma: 1.0,
            scale: Some(0.5),
        };
        let stack = synth_stack(&gt, &[0.0, 1.0], &opts).unwrap();
        for px in stack.images()[0].pixels() {
            for v in px {
                assert!((v - 0.5).abs() <= 0.5 / 255.0);
            }
        }
        assert!(stack.images()[1].pixels().iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn standard_ev_sets_give_five_images() {
        let gt = RadianceMap::from_fn(8, 8, |x, y| [x as f64 * 0.3, y as f64 * 0.2, -1.0]).unwrap();
        for evs in [[0.0, 0.5, -0.5, 2.0, -2.0], [0.0, 1.0, -1.0, 2.0, -2.0]] {
            let stack = synth_stack(&gt, &evs, &RenderOptions::default()).unwrap();
            assert_eq!(stack.len(), 5);
            assert_eq!(stack.evs()[stack.middle()], 0.0);
        }
        assert!(synth_stack(&gt, &[], &RenderOptions::default()).is_err());
    }

    #[test]
    fn anchor_puts_median_at_code_118() {
        let gt = RadianceMap::from_fn(5, 1, |x, _| [(x as f64 + 1.0).ln(); 3]).unwrap();
        let reference = render_reference(&gt, &RenderOptions::default()).unwrap();
        // median luminance is the x = 2 pixel
        assert_eq!(code8(reference.pixel(2, 0)[0]), ANCHOR_CODE);
    }

    #[test]
    fn common_time_scale_shifts_radiance() {
        let gt = RadianceMap::from_fn(32, 32, |x, y| [x as f64 * 0.1 - 2.0, y as f64 * 0.1 - 2.0, -1.5]).unwrap();
        let stack = synth_stack(&gt, &[-1.0, 0.0, 1.0], &RenderOptions::default()).unwrap();
        let table = CrfTable::new([0, 1, 2].map(|_| ramp_table())).unwrap();
        let k: f64 = 3.0;
        let scaled = ExposureStack::new(stack.images().to_vec(), stack.evs().to_vec(), k).unwrap();
        let a = recover_radiance(&stack, &table).unwrap();
        let b = recover_radiance(&scaled, &table).unwrap();
        for (pa, pb) in a.log_pixels().iter().zip(b.log_pixels()) {
            for ch in 0..3 {
                assert!((pb[ch] - (pa[ch] - k.ln())).abs() < 1e-12);
            }
        }
    }
}
