//! CIEDE2000 hue difference between images.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{code8, LdrImage, Rgb};

/// sRGB (D65) to XYZ.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// D65 white as the image of sRGB (1,1,1), so white maps to a* = b* = 0.
const WHITE: [f64; 3] = [
    SRGB_TO_XYZ[0][0] + SRGB_TO_XYZ[0][1] + SRGB_TO_XYZ[0][2],
    SRGB_TO_XYZ[1][0] + SRGB_TO_XYZ[1][1] + SRGB_TO_XYZ[1][2],
    SRGB_TO_XYZ[2][0] + SRGB_TO_XYZ[2][1] + SRGB_TO_XYZ[2][2],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabPixel {
    pub fn new(l: f64, a: f64, b: f64) -> Self {
        LabPixel { l, a, b }
    }
}

fn srgb_decode(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPSILON: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

pub fn srgb_to_lab(x: &Rgb) -> LabPixel {
    let lin = x.map(srgb_decode);
    let xyz = SRGB_TO_XYZ.map(|row| row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]);
    let f = [0, 1, 2].map(|i| lab_f(xyz[i] / WHITE[i]));
    LabPixel {
        l: 116.0 * f[1] - 16.0,
        a: 500.0 * (f[0] - f[1]),
        b: 200.0 * (f[1] - f[2]),
    }
}

/// Intermediate CIEDE2000 quantities for a pair of colors.
#[derive(Debug, Clone, Copy)]
pub struct Ciede2000Terms {
    pub delta_l: f64,
    pub delta_c: f64,
    /// Signed `ΔH' = 2·sqrt(C'1·C'2)·sin(Δh'/2)`.
    pub delta_h: f64,
    pub s_l: f64,
    pub s_c: f64,
    pub s_h: f64,
    pub r_t: f64,
}

impl Ciede2000Terms {
    /// Full color difference with unit parametric factors.
    pub fn delta_e(&self) -> f64 {
        let l = self.delta_l / self.s_l;
        let c = self.delta_c / self.s_c;
        let h = self.delta_h / self.s_h;
        (l * l + c * c + h * h + self.r_t * c * h).sqrt()
    }
}

fn hue_angle_deg(b: f64, a_prime: f64) -> f64 {
    if b == 0.0 && a_prime == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a_prime).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

pub fn ciede2000_terms(p: &LabPixel, q: &LabPixel) -> Ciede2000Terms {
    let c1 = p.a.hypot(p.b);
    let c2 = q.a.hypot(q.b);
    let c_bar7 = ((c1 + c2) / 2.0).powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + 25f64.powi(7))).sqrt());
    let a1 = (1.0 + g) * p.a;
    let a2 = (1.0 + g) * q.a;
    let cp1 = a1.hypot(p.b);
    let cp2 = a2.hypot(q.b);
    let hp1 = hue_angle_deg(p.b, a1);
    let hp2 = hue_angle_deg(q.b, a2);

    let delta_l = q.l - p.l;
    let delta_c = cp2 - cp1;
    let chroma_product = cp1 * cp2;
    let dh = if chroma_product == 0.0 {
        0.0
    } else {
        let d = hp2 - hp1;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let delta_h = 2.0 * chroma_product.sqrt() * (dh.to_radians() / 2.0).sin();

    let l_bar = (p.l + q.l) / 2.0;
    let cp_bar = (cp1 + cp2) / 2.0;
    let h_bar = if chroma_product == 0.0 {
        hp1 + hp2
    } else if (hp1 - hp2).abs() <= 180.0 {
        (hp1 + hp2) / 2.0
    } else if hp1 + hp2 < 360.0 {
        (hp1 + hp2 + 360.0) / 2.0
    } else {
        (hp1 + hp2 - 360.0) / 2.0
    };
    let t = 1.0 - 0.17 * (h_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar).to_radians().cos()
        + 0.32 * (3.0 * h_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar - 63.0).to_radians().cos();
    let l50 = (l_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let s_c = 1.0 + 0.045 * cp_bar;
    let s_h = 1.0 + 0.015 * cp_bar * t;
    let d_theta = 30.0 * (-((h_bar - 275.0) / 25.0).powi(2)).exp();
    let cp_bar7 = cp_bar.powi(7);
    let r_c = 2.0 * (cp_bar7 / (cp_bar7 + 25f64.powi(7))).sqrt();
    let r_t = -(2.0 * d_theta).to_radians().sin() * r_c;

    Ciede2000Terms {
        delta_l,
        delta_c,
        delta_h,
        s_l,
        s_c,
        s_h,
        r_t,
    }
}

/// `|ΔH'|`, the unscaled CIEDE2000 hue difference.
pub fn ciede2000_hue_diff(p: &LabPixel, q: &LabPixel) -> f64 {
    ciede2000_terms(p, q).delta_h.abs()
}

pub fn ciede2000(p: &LabPixel, q: &LabPixel) -> f64 {
    ciede2000_terms(p, q).delta_e()
}

/// Which hue term is averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricVariant {
    /// `|ΔH'|`.
    #[default]
    #[serde(rename = "raw_dHp")]
    RawDeltaH,
    /// `|ΔH'| / S_H` (unit `k_H`).
    #[serde(rename = "scaled_dHp")]
    ScaledDeltaH,
}

impl MetricVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricVariant::RawDeltaH => "raw_dHp",
            MetricVariant::ScaledDeltaH => "scaled_dHp",
        }
    }

    fn evaluate(&self, p: &LabPixel, q: &LabPixel) -> f64 {
        let terms = ciede2000_terms(p, q);
        match self {
            MetricVariant::RawDeltaH => terms.delta_h.abs(),
            MetricVariant::ScaledDeltaH => (terms.delta_h / terms.s_h).abs(),
        }
    }
}

impl std::str::FromStr for MetricVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_dHp" | "raw" => Ok(MetricVariant::RawDeltaH),
            "scaled_dHp" | "scaled" => Ok(MetricVariant::ScaledDeltaH),
            other => Err(Error::Config(format!(
                "unknown metric variant '{other}' (expected raw_dHp or scaled_dHp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HueDiffOptions {
    pub variant: MetricVariant,
    /// Skip pixels where the reference has a channel at code 0 or 255.
    pub exclude_clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HueDiffReport {
    #[serde(rename = "mean_dH")]
    pub mean_dh: f64,
    pub pixels: usize,
    pub excluded: usize,
    pub variant: MetricVariant,
}

/// Sum by recursive halving; the result depends only on the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Mean hue difference of `image` against `reference`.
pub fn image_hue_diff(image: &LdrImage, reference: &LdrImage, opts: &HueDiffOptions) -> Result<HueDiffReport> {
    if !image.same_size(reference.width(), reference.height()) {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {}x{} with {}x{}",
            image.width(),
            image.height(),
            reference.width(),
            reference.height()
        )));
    }
    let per_pixel: Vec<Option<f64>> = image
        .pixels()
        .par_iter()
        .zip(reference.pixels().par_iter())
        .map(|(a, b)| {
            if opts.exclude_clipped && b.iter().any(|&v| matches!(code8(v), 0 | 255)) {
                None
            } else {
                Some(opts.variant.evaluate(&srgb_to_lab(a), &srgb_to_lab(b)))
            }
        })
        .collect();
    let used: Vec<f64> = per_pixel.iter().flatten().copied().collect();
    let mean_dh = if used.is_empty() {
        0.0
    } else {
        pairwise_sum(&used) / used.len() as f64
    };
    Ok(HueDiffReport {
        mean_dh,
        pixels: used.len(),
        excluded: per_pixel.len() - used.len(),
        variant: opts.variant,
    })
}
