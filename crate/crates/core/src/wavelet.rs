//! Haar discrete wavelet transform in one and two dimensions.
//!
//! A single step works on non-overlapping pairs `(x[2t], x[2t+1])` in 1D and on
//! non-overlapping 2×2 blocks `[[a, b], [c, d]]` in 2D:
//!
//! ```text
//! A   = (a + b + c + d) / 2
//! D^h = (b + d - a - c) / 2
//! D^v = (c + d - a - b) / 2
//! D^d = (a + d - b - c) / 2
//! ```
//!
//! which is the row-then-column pass of the Haar filter pair
//! `L = [√2/2, √2/2]`, `H = [-√2/2, √2/2]` followed by keeping every second
//! sample. The step is orthonormal, so the approximation of a constant signal
//! doubles at every level while all details vanish.

use crate::error::{invalid, Result};

/// Haar filter tap magnitude, `√2 / 2`.
pub const HAAR_TAP: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Low-pass analysis filter of the Haar wavelet.
pub const HAAR_LOW: [f64; 2] = [HAAR_TAP, HAAR_TAP];

/// High-pass analysis filter of the Haar wavelet.
pub const HAAR_HIGH: [f64; 2] = [-HAAR_TAP, HAAR_TAP];

/// Row-major grid of real samples. Pipeline inputs live in `[0, 1]`; the
/// transforms accept any finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid(format!("image dimensions must be positive, got {height}x{width}")));
        }
        if pixels.len() != height * width {
            return Err(invalid(format!("pixel buffer has {} samples, expected {}", pixels.len(), height * width)));
        }
        Ok(Self { height, width, pixels })
    }

    /// Image with every pixel set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self { height, width, pixels: vec![value; height * width] }
    }

    /// Image whose pixel at `(y, x)` is `f(y, x)`.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(y, x));
            }
        }
        Self { height, width, pixels }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, value: f64) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Largest absolute pixel value.
    pub fn max_abs(&self) -> f64 {
        self.pixels.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Top-left `height × width` sub-image.
    pub fn crop(&self, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || height > self.height || width > self.width {
            return Err(invalid(format!("cannot crop {}x{} image to {height}x{width}", self.height, self.width)));
        }
        Ok(Self::from_fn(height, width, |y, x| self.get(y, x)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { height: self.height, width: self.width, pixels: self.pixels.iter().map(|&v| f(v)).collect() }
    }
}

/// Horizontal, vertical and diagonal detail sub-bands of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailTriple {
    pub d_h: GrayImage,
    pub d_v: GrayImage,
    pub d_d: GrayImage,
}

impl DetailTriple {
    pub fn new(d_h: GrayImage, d_v: GrayImage, d_d: GrayImage) -> Result<Self> {
        if d_h.dims() != d_v.dims() || d_h.dims() != d_d.dims() {
            return Err(invalid(format!(
                "detail sub-bands disagree in size: {:?}, {:?}, {:?}",
                d_h.dims(),
                d_v.dims(),
                d_d.dims()
            )));
        }
        Ok(Self { d_h, d_v, d_d })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.d_h.dims()
    }

    pub fn bands(&self) -> [&GrayImage; 3] {
        [&self.d_h, &self.d_v, &self.d_d]
    }

    pub fn is_zero(&self) -> bool {
        self.bands().iter().all(|b| b.pixels().iter().all(|&v| v == 0.0))
    }
}

/// Detail triples for levels `1..=n` plus the final approximation `A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    /// `levels[i - 1]` holds the details of level `i`.
    pub levels: Vec<DetailTriple>,
    pub approx: GrayImage,
    /// Size of the image before padding to a multiple of `2^n`.
    pub original_height: usize,
    pub original_width: usize,
}

impl WaveletPyramid {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Details of level `i` (1-based).
    pub fn level(&self, i: usize) -> Option<&DetailTriple> {
        i.checked_sub(1).and_then(|k| self.levels.get(k))
    }

    /// Dimensions of the padded image the pyramid was built from.
    pub fn padded_dims(&self) -> (usize, usize) {
        match self.levels.first() {
            Some(first) => (first.dims().0 * 2, first.dims().1 * 2),
            None => self.approx.dims(),
        }
    }
}

/// One Haar analysis step on an even-length signal.
pub fn dwt_step_1d(signal: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.is_empty() || !signal.len().is_multiple_of(2) {
        return Err(invalid(format!("1D step requires a non-empty even-length signal, got length {}", signal.len())));
    }
    let (approx, detail) = signal
        .chunks_exact(2)
        .map(|p| (HAAR_LOW[0] * p[0] + HAAR_LOW[1] * p[1], HAAR_HIGH[0] * p[0] + HAAR_HIGH[1] * p[1]))
        .unzip();
    Ok((approx, detail))
}

/// Inverse of [`dwt_step_1d`].
pub fn idwt_step_1d(approx: &[f64], detail: &[f64]) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(invalid(format!("approximation and detail lengths differ: {} vs {}", approx.len(), detail.len())));
    }
    let mut out = Vec::with_capacity(approx.len() * 2);
    for (&a, &d) in approx.iter().zip(detail) {
        out.push((a - d) * HAAR_TAP);
        out.push((a + d) * HAAR_TAP);
    }
    Ok(out)
}

/// One 2D analysis step. Both dimensions must be even.
pub fn dwt_step_2d(input: &GrayImage) -> Result<(GrayImage, DetailTriple)> {
    let (h, w) = input.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(invalid(format!("2D step requires even dimensions, got {h}x{w}; pad first")));
    }
    let (oh, ow) = (h / 2, w / 2);
    let n = oh * ow;
    let mut approx = Vec::with_capacity(n);
    let mut d_h = Vec::with_capacity(n);
    let mut d_v = Vec::with_capacity(n);
    let mut d_d = Vec::with_capacity(n);
    for r in 0..oh {
        let top = input.row(2 * r);
        let bottom = input.row(2 * r + 1);
        for c in 0..ow {
            let (a, b) = (top[2 * c], top[2 * c + 1]);
            let (cc, d) = (bottom[2 * c], bottom[2 * c + 1]);
            approx.push(0.5 * (a + b + cc + d));
            d_h.push(0.5 * (b + d - a - cc));
            d_v.push(0.5 * (cc + d - a - b));
            d_d.push(0.5 * (a + d - b - cc));
        }
    }
    let grid = |p| GrayImage { height: oh, width: ow, pixels: p };
    Ok((grid(approx), DetailTriple { d_h: grid(d_h), d_v: grid(d_v), d_d: grid(d_d) }))
}

/// Inverse of [`dwt_step_2d`].
pub fn idwt_step_2d(approx: &GrayImage, details: &DetailTriple) -> Result<GrayImage> {
    if approx.dims() != details.dims() {
        return Err(invalid(format!(
            "approximation {:?} and details {:?} disagree in size",
            approx.dims(),
            details.dims()
        )));
    }
    let (h, w) = approx.dims();
    let mut out = GrayImage::filled(2 * h, 2 * w, 0.0);
    for r in 0..h {
        for c in 0..w {
            let a = approx.get(r, c);
            let dh = details.d_h.get(r, c);
            let dv = details.d_v.get(r, c);
            let dd = details.d_d.get(r, c);
            out.set(2 * r, 2 * c, 0.5 * (a - dh - dv + dd));
            out.set(2 * r, 2 * c + 1, 0.5 * (a + dh - dv - dd));
            out.set(2 * r + 1, 2 * c, 0.5 * (a - dh + dv - dd));
            out.set(2 * r + 1, 2 * c + 1, 0.5 * (a + dh + dv + dd));
        }
    }
    Ok(out)
}

/// `n`-level decomposition of an image whose dimensions are divisible by `2^n`.
pub fn decompose(image: &GrayImage, n: usize) -> Result<WaveletPyramid> {
    if n == 0 {
        return Err(invalid("decomposition depth must be at least 1"));
    }
    let block = checked_block(n)?;
    let (h, w) = image.dims();
    if h % block != 0 || w % block != 0 {
        return Err(invalid(format!("{h}x{w} image is not divisible by 2^{n} = {block}; pad first")));
    }
    let mut levels = Vec::with_capacity(n);
    let mut approx = image.clone();
    for _ in 0..n {
        let (next, details) = dwt_step_2d(&approx)?;
        levels.push(details);
        approx = next;
    }
    Ok(WaveletPyramid { levels, approx, original_height: h, original_width: w })
}

/// Pads with [`pad_to_divisible`] and decomposes, recording the unpadded size.
pub fn decompose_padded(image: &GrayImage, n: usize) -> Result<WaveletPyramid> {
    let (padded, (h, w)) = pad_to_divisible(image, n);
    let mut pyramid = decompose(&padded, n)?;
    pyramid.original_height = h;
    pyramid.original_width = w;
    Ok(pyramid)
}

/// Inverse of [`decompose`]; returns the padded-size image.
pub fn reconstruct(pyramid: &WaveletPyramid) -> Result<GrayImage> {
    if pyramid.levels.is_empty() {
        return Err(invalid("pyramid has no levels"));
    }
    for (i, pair) in pyramid.levels.windows(2).enumerate() {
        let (fine, coarse) = (pair[0].dims(), pair[1].dims());
        if fine != (coarse.0 * 2, coarse.1 * 2) {
            return Err(invalid(format!(
                "level {} is {:?} but level {} is {:?}; sizes must halve exactly",
                i + 1,
                fine,
                i + 2,
                coarse
            )));
        }
    }
    for (i, level) in pyramid.levels.iter().enumerate() {
        if level.d_v.dims() != level.d_h.dims() || level.d_d.dims() != level.d_h.dims() {
            return Err(invalid(format!("level {} sub-bands disagree in size", i + 1)));
        }
    }
    let mut approx = pyramid.approx.clone();
    for details in pyramid.levels.iter().rev() {
        approx = idwt_step_2d(&approx, details)?;
    }
    Ok(approx)
}

/// Pads on the bottom and right by edge replication so both dimensions
/// become the smallest multiples of `2^n`. Returns the original size.
pub fn pad_to_divisible(image: &GrayImage, n: usize) -> (GrayImage, (usize, usize)) {
    let (h, w) = image.dims();
    let block = 1usize << n.min(usize::BITS as usize - 1);
    let ph = h.div_ceil(block) * block;
    let pw = w.div_ceil(block) * block;
    if (ph, pw) == (h, w) {
        return (image.clone(), (h, w));
    }
    let padded = GrayImage::from_fn(ph, pw, |y, x| image.get(y.min(h - 1), x.min(w - 1)));
    (padded, (h, w))
}

fn checked_block(n: usize) -> Result<usize> {
    if n >= usize::BITS as usize - 1 {
        return Err(invalid(format!("decomposition depth {n} is too large")));
    }
    Ok(1usize << n)
}
