#![allow(dead_code)]

pub mod sharma;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use huefuse::{LdrImage, RadianceMap, Rgb};

pub const EVS_HALF: [f64; 5] = [0.0, 0.5, -0.5, 2.0, -2.0];
pub const EVS_ONE: [f64; 5] = [0.0, 1.0, -1.0, 2.0, -2.0];

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_huefuse"))
}

pub fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    bin().args(args.iter().map(|a| a.as_ref())).output().expect("spawn huefuse")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn mix(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    [0, 1, 2].map(|c| a[c] + (b[c] - a[c]) * t)
}

fn scale(a: Rgb, s: f64) -> Rgb {
    a.map(|v| v * s)
}

fn add(a: Rgb, b: Rgb) -> Rgb {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn bump(u: f64, v: f64, cu: f64, cv: f64, r: f64) -> f64 {
    (-((u - cu).powi(2) + (v - cv).powi(2)) / (2.0 * r * r)).exp()
}

/// Pure hue at angle `h` degrees, max component 1, min 0.
fn hue(h: f64) -> Rgb {
    let k = |n: f64| {
        let k = (n + h / 60.0).rem_euclid(6.0);
        1.0 - (k.min(4.0 - k).clamp(0.0, 1.0))
    };
    [k(5.0), k(3.0), k(1.0)]
}

fn chroma(h: f64, sat: f64, level: f64) -> Rgb {
    scale(mix([1.0; 3], hue(h), sat), level)
}

/// Linear radiance field sampled at pixel centres of a unit square.
pub fn field(w: usize, h: usize, f: impl Fn(f64, f64) -> Rgb) -> RadianceMap {
    textured_field(w, h, 0.0, f)
}

/// Deterministic per-pixel value in [-1, 1].
fn grain(x: usize, y: usize) -> f64 {
    let mut k = (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (y as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    k ^= k >> 31;
    k = k.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    k ^= k >> 29;
    (k >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Like [`field`] with grey surface texture: every pixel is scaled by
/// `exp(amount * grain)`, which leaves its hue untouched.
pub fn textured_field(w: usize, h: usize, amount: f64, f: impl Fn(f64, f64) -> Rgb) -> RadianceMap {
    RadianceMap::from_fn(w, h, |x, y| {
        let u = (x as f64 + 0.5) / w as f64;
        let v = (y as f64 + 0.5) / h as f64;
        let t = amount * grain(x, y);
        f(u, v).map(|e| e.max(1e-6).ln() + t)
    })
    .unwrap()
}

/// Log-amplitude of the surface texture of the test scenes.
pub const TEXTURE: f64 = 0.1;

pub struct Scene {
    pub name: &'static str,
    pub radiance: RadianceMap,
}

/// Procedural high-dynamic-range scenes with strong chroma in both the
/// shadows and the highlights.
pub fn scenes(w: usize, h: usize) -> Vec<Scene> {
    vec![
        Scene {
            name: "window",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                let wall = scale([0.16, 0.10, 0.06], 0.5 + 0.8 * u);
                let inside_window = (0.3..0.75).contains(&u) && (0.1..0.5).contains(&v);
                let sky = mix([3.0, 5.0, 12.0], [9.0, 7.0, 3.0], v * 2.0);
                let base = if inside_window { sky } else { wall };
                let vase = bump(u, v, 0.2, 0.78, 0.08);
                add(base, scale([0.9, 0.06, 0.04], vase))
            }),
        },
        Scene {
            name: "sunset",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                if v > 0.62 {
                    let water = scale([0.05, 0.035, 0.06], 1.0 + 0.5 * (u * 40.0).sin());
                    add(water, scale([2.0, 0.7, 0.1], bump(u, v, 0.6, 0.7, 0.05)))
                } else {
                    let t = v / 0.62;
                    let sky = mix([0.4, 0.8, 2.6], [10.0, 3.5, 0.6], t * t);
                    add(sky, scale([60.0, 40.0, 12.0], bump(u, v, 0.6, 0.56, 0.04)))
                }
            }),
        },
        Scene {
            name: "checker",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                let (i, j) = ((u * 6.0).floor(), (v * 4.0).floor());
                let h = 60.0 * i + 17.0 * j;
                let sat = 0.35 + 0.15 * j;
                let level = (2f64).powf(-4.5 + 1.8 * i + 0.4 * j);
                let edge = ((u * 6.0).fract().min(1.0 - (u * 6.0).fract())).min((v * 4.0).fract().min(1.0 - (v * 4.0).fract()));
                if edge < 0.04 {
                    [0.03; 3]
                } else {
                    chroma(h, sat, level)
                }
            }),
        },
        Scene {
            name: "lamps",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                let mut px = mix([0.02, 0.025, 0.04], [0.09, 0.06, 0.04], v);
                let lamps: [(f64, f64, Rgb); 4] = [
                    (0.25, 0.3, [30.0, 3.0, 1.0]),
                    (0.7, 0.25, [1.5, 20.0, 3.0]),
                    (0.35, 0.72, [2.0, 4.0, 40.0]),
                    (0.78, 0.7, [25.0, 18.0, 1.0]),
                ];
                for (cu, cv, color) in lamps {
                    px = add(px, scale(color, bump(u, v, cu, cv, 0.07)));
                    px = add(px, scale(color, 0.02 * bump(u, v, cu, cv, 0.25)));
                }
                px
            }),
        },
        Scene {
            name: "foliage",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                let n = (u * 13.0 + (v * 7.0).sin()).sin() * (v * 11.0 + (u * 5.0).cos()).sin();
                if n > 0.45 && v < 0.7 {
                    mix([2.5, 4.0, 7.0], [6.0, 6.5, 7.0], u)
                } else {
                    let leaf = 0.5 + 0.5 * (u * 30.0 + v * 17.0).sin();
                    scale(mix([0.05, 0.16, 0.02], [0.25, 0.2, 0.03], leaf), 0.4 + 1.2 * (1.0 - v))
                }
            }),
        },
        Scene {
            name: "neon",
            radiance: textured_field(w, h, TEXTURE, |u, v| {
                let stripe = (v * 8.0).floor();
                let level = (2f64).powf(-5.0 + 10.0 * u);
                let glow = 0.5 + 0.5 * (2.0 * PI * v * 8.0).sin().abs();
                chroma(stripe * 45.0 + 10.0, 0.8, level * glow)
            }),
        },
    ]
}

/// Smooth random-looking radiance used by tests that need spatial variety.
pub fn ramp_scene(w: usize, h: usize) -> RadianceMap {
    field(w, h, |u, v| {
        let base = (2f64).powf(-4.0 + 8.0 * u);
        chroma(360.0 * v, 0.6, base)
    })
}

pub fn write_scene_hdr(map: &RadianceMap, path: &Path) {
    huefuse::io::write_hdr(map, path).unwrap();
}

pub fn ldr_from_fn(w: usize, h: usize, f: impl FnMut(usize, usize) -> Rgb) -> LdrImage {
    LdrImage::from_fn(w, h, f).unwrap()
}
