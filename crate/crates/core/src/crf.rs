//! Inverse camera response estimation.
//!
//! For sampled pixels `i` and exposures `j` with codes `z_ij`, solve in the
//! least-squares sense
//!
//! ```text
//! ω(z_ij)·(g⁻¹(z_ij) − ln E_i) = ω(z_ij)·ln Δt_j
//! λ·ω(z)·(g⁻¹(z−1) − 2g⁻¹(z) + g⁻¹(z+1)) = 0        z = 1..254
//! g⁻¹(128) = 0
//! ```
//!
//! with a dense SVD, then project each channel onto non-decreasing tables.

use log::debug;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{code8, luma, CrfTable, ExposureStack, GAUGE_CODE, LEVELS};
use crate::isotonic::isotonic_non_decreasing;

const Z_MIN: usize = 0;
const Z_MAX: usize = LEVELS - 1;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrfSolveConfig {
    /// Number of sampled pixel locations.
    pub samples: usize,
    /// Smoothness weight.
    pub lambda: f64,
    /// Tie-break seed for sampling among equal-intensity pixels.
    pub seed: u64,
}

impl Default for CrfSolveConfig {
    fn default() -> Self {
        CrfSolveConfig {
            samples: 100,
            lambda: 50.0,
            seed: 0,
        }
    }
}

impl CrfSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!(
                "smoothness lambda must be a finite value >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Hat weight: rises from 0 at code 0 to 127 at the middle, back to 0 at 255.
pub fn weight(z: usize) -> f64 {
    debug_assert!(z <= Z_MAX);
    if 2 * z <= Z_MIN + Z_MAX {
        (z - Z_MIN) as f64
    } else {
        (Z_MAX - z) as f64
    }
}

/// Picks `cfg.samples` pixel indices at evenly spaced intensity ranks of the
/// middle exposure. Equal intensities are ordered by a seeded random key.
pub fn sample_pixels(stack: &ExposureStack, cfg: &CrfSolveConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let image = &stack.images()[stack.middle()];
    let count = image.pixels().len();
    if cfg.samples > count {
        return Err(Error::Sampling(format!(
            "{} samples requested but the image has only {count} pixels",
            cfg.samples
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut keyed: Vec<(usize, u64, usize)> = image
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, px)| (code8(luma(px).clamp(0.0, 1.0)), rng.next_u64(), i))
        .collect();
    keyed.sort_unstable();
    Ok((0..cfg.samples)
        .map(|k| {
            let rank = ((2 * k + 1) * count) / (2 * cfg.samples);
            keyed[rank].2
        })
        .collect())
}

pub fn estimate_inverse_crf(stack: &ExposureStack, cfg: &CrfSolveConfig) -> Result<CrfTable> {
    cfg.validate()?;
    let n = stack.len();
    if cfg.samples * (n - 1) <= LEVELS - 2 {
        return Err(Error::Solver(format!(
            "underdetermined system: P(N-1) = {}x{} = {} must exceed {}",
            cfg.samples,
            n - 1,
            cfg.samples * (n - 1),
            LEVELS - 2
        )));
    }
    let indices = sample_pixels(stack, cfg)?;
    let log_times: Vec<f64> = (0..n).map(|j| stack.log_time(j)).collect();

    let channels: Vec<Result<Vec<f64>>> = (0..3)
        .into_par_iter()
        .map(|ch| {
            let codes: Vec<Vec<usize>> = indices
                .iter()
                .map(|&i| stack.images().iter().map(|im| code8(im.pixels()[i][ch])).collect())
                .collect();
            solve_channel(&codes, &log_times, cfg.lambda)
                .map_err(|e| Error::Solver(format!("channel {}: {e}", ["r", "g", "b"][ch])))
        })
        .collect();

    let mut tables = Vec::with_capacity(3);
    for table in channels {
        let mut table = isotonic_non_decreasing(&table?);
        let anchor = table[GAUGE_CODE];
        table.iter_mut().for_each(|v| *v -= anchor);
        tables.push(table);
    }
    let [r, g, b]: [Vec<f64>; 3] = tables.try_into().expect("three channels");
    CrfTable::new([r, g, b])
}

/// Solves one channel. `codes[i][j]` is the code of sample `i` in exposure `j`.
fn solve_channel(codes: &[Vec<usize>], log_times: &[f64], lambda: f64) -> Result<Vec<f64>, String> {
    // saturated-everywhere samples contribute no equation
    let samples: Vec<&Vec<usize>> = codes
        .iter()
        .filter(|row| row.iter().any(|&z| weight(z) > 0.0))
        .collect();
    if samples.is_empty() {
        return Err("every sampled pixel is saturated in every exposure".into());
    }

    // codes that appear in no equation at all (only possible with lambda = 0)
    let mut used = vec![lambda > 0.0; LEVELS];
    used[GAUGE_CODE] = true;
    for row in &samples {
        for &z in row.iter() {
            if weight(z) > 0.0 {
                used[z] = true;
            }
        }
    }
    let mut column = vec![usize::MAX; LEVELS];
    let mut cols = 0;
    for z in 0..LEVELS {
        if used[z] {
            column[z] = cols;
            cols += 1;
        }
    }
    let code_cols = cols;
    cols += samples.len();

    let data_rows = samples.len() * log_times.len();
    let smooth_rows = if lambda > 0.0 { LEVELS - 2 } else { 0 };
    let rows = data_rows + 1 + smooth_rows;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);

    let mut r = 0;
    for (i, row) in samples.iter().enumerate() {
        for (j, &z) in row.iter().enumerate() {
            let w = weight(z);
            if w > 0.0 {
                a[(r, column[z])] = w;
                a[(r, code_cols + i)] = -w;
                b[r] = w * log_times[j];
            }
            r += 1;
        }
    }
    a[(r, column[GAUGE_CODE])] = 1.0;
    r += 1;
    if lambda > 0.0 {
        for z in 1..LEVELS - 1 {
            let w = lambda * weight(z);
            a[(r, column[z - 1])] = w;
            a[(r, column[z])] = -2.0 * w;
            a[(r, column[z + 1])] = w;
            r += 1;
        }
    }

    let svd = a.svd(true, true);
    let largest = svd.singular_values.max();
    let smallest = svd.singular_values.min();
    if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
        return Err(format!(
            "rank-deficient system ({rows}x{cols}, singular values {smallest:.3e}..{largest:.3e}); \
             the stack lacks exposure variation or intensity spread"
        ));
    }
    debug!("CRF solve {rows}x{cols}, condition {:.3e}", largest / smallest);
    let x = svd.solve(&b, 0.0)?;

    let mut table = vec![f64::NAN; LEVELS];
    for z in 0..LEVELS {
        if used[z] {
            table[z] = x[column[z]];
        }
    }
    fill_gaps(&mut table);
    Ok(table)
}

/// Linear interpolation over NaN entries; ends take the nearest value.
fn fill_gaps(table: &mut [f64]) {
    let known: Vec<usize> = (0..table.len()).filter(|&z| !table[z].is_nan()).collect();
    let (first, last) = (known[0], *known.last().unwrap());
    for z in 0..first {
        table[z] = table[first];
    }
    for z in last + 1..table.len() {
        table[z] = table[last];
    }
    for pair in known.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for z in lo + 1..hi {
            let t = (z - lo) as f64 / (hi - lo) as f64;
            table[z] = table[lo] + t * (table[hi] - table[lo]);
        }
    }
}
