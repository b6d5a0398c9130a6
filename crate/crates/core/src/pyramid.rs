//! Gaussian and Laplacian pyramids over single-channel planes.
//!
//! 5-tap binomial kernel `(1,4,6,4,1)/16`, reflect-101 borders, and
//! ceil-halving so odd sizes keep their last row and column.

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(width * height, data.len());
        Plane { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Reflect-101 (`dcb|abcd|cba`) index into `0..n`.
#[inline]
pub(crate) fn reflect101(mut i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

/// Default depth: number of halvings until the short side reaches one pixel.
pub fn auto_depth(width: usize, height: usize) -> usize {
    let m = width.min(height).max(1);
    (usize::BITS - 1 - m.leading_zeros()) as usize
}

fn blur_rows(src: &Plane) -> Plane {
    let mut out = vec![0.0; src.data.len()];
    for y in 0..src.height {
        let row = &src.data[y * src.width..(y + 1) * src.width];
        for x in 0..src.width {
            out[y * src.width + x] = KERNEL
                .iter()
                .enumerate()
                .map(|(k, c)| c * row[reflect101(x as isize + k as isize - 2, src.width)])
                .sum();
        }
    }
    Plane::new(src.width, src.height, out)
}

fn blur_cols(src: &Plane) -> Plane {
    let mut out = vec![0.0; src.data.len()];
    for y in 0..src.height {
        for x in 0..src.width {
            out[y * src.width + x] = KERNEL
                .iter()
                .enumerate()
                .map(|(k, c)| c * src.at(x, reflect101(y as isize + k as isize - 2, src.height)))
                .sum();
        }
    }
    Plane::new(src.width, src.height, out)
}

pub fn blur(src: &Plane) -> Plane {
    blur_cols(&blur_rows(src))
}

/// Blur then keep even rows and columns.
pub fn reduce(src: &Plane) -> Plane {
    let blurred = blur(src);
    let (w, h) = (src.width.div_ceil(2), src.height.div_ceil(2));
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(blurred.at(2 * x, 2 * y));
        }
    }
    Plane::new(w, h, data)
}

/// Upsample `src` to `width × height` by zero insertion and a blur with the
/// kernel scaled by 2 along each axis.
pub fn expand(src: &Plane, width: usize, height: usize) -> Plane {
    debug_assert_eq!(src.width, width.div_ceil(2));
    debug_assert_eq!(src.height, height.div_ceil(2));
    // zero insertion doubles the gain, except on a degenerate 1-pixel axis
    let gain_x = if width == 1 { 1.0 } else { 2.0 };
    let gain_y = if height == 1 { 1.0 } else { 2.0 };
    let mut rows = vec![0.0; width * src.height];
    for y in 0..src.height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, c) in KERNEL.iter().enumerate() {
                let ux = reflect101(x as isize + k as isize - 2, width);
                if ux.is_multiple_of(2) {
                    acc += gain_x * c * src.at(ux / 2, y);
                }
            }
            rows[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, c) in KERNEL.iter().enumerate() {
                let uy = reflect101(y as isize + k as isize - 2, height);
                if uy.is_multiple_of(2) {
                    acc += gain_y * c * rows[(uy / 2) * width + x];
                }
            }
            out[y * width + x] = acc;
        }
    }
    Plane::new(width, height, out)
}

pub fn gaussian_pyramid(base: &Plane, depth: usize) -> Vec<Plane> {
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(base.clone());
    for _ in 0..depth {
        let next = reduce(levels.last().unwrap());
        levels.push(next);
    }
    levels
}

/// Band-pass levels plus the coarsest Gaussian level as the last entry.
pub fn laplacian_pyramid(base: &Plane, depth: usize) -> Vec<Plane> {
    let gauss = gaussian_pyramid(base, depth);
    let mut levels = Vec::with_capacity(depth + 1);
    for k in 0..depth {
        let up = expand(&gauss[k + 1], gauss[k].width, gauss[k].height);
        let band = gauss[k].data.iter().zip(&up.data).map(|(a, b)| a - b).collect();
        levels.push(Plane::new(gauss[k].width, gauss[k].height, band));
    }
    levels.push(gauss[depth].clone());
    levels
}

pub fn collapse(pyramid: &[Plane]) -> Plane {
    let mut acc = pyramid.last().expect("non-empty pyramid").clone();
    for band in pyramid.iter().rev().skip(1) {
        let up = expand(&acc, band.width, band.height);
        let data = band.data.iter().zip(&up.data).map(|(a, b)| a + b).collect();
        acc = Plane::new(band.width, band.height, data);
    }
    acc
}
