//! Spectral localization of high-amplitude regions and blur-masking.
//!
//! The masking pipeline for one maximum depth `n`:
//!
//! 1. convert RGB to luma and pad to a multiple of `2^n`;
//! 2. decompose with the Haar transform;
//! 3. at each level `i`, take the per-pixel l2 norm of `(D^h, D^v, D^d)`,
//!    average it over a 3×3 neighborhood and keep pixels strictly above
//!    `θ_i = 2^(i-1) θ`;
//! 4. upsample every level mask back to full resolution by replication and
//!    take the union;
//! 5. crop to the input size and replace masked pixels by a Gaussian-blurred
//!    copy of the input.
//!
//! The doubling of `θ_i` tracks the doubling of the approximation amplitude
//! per level, so a perturbation confined to a value interval of width `θ`
//! never produces a mask pixel.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::wavelet::{decompose, pad_to_divisible, DetailTriple, GrayImage};

/// Luma weights (ITU-R BT.601) for red, green and blue.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub const DEFAULT_THETA: f64 = 0.17;
pub const DEFAULT_MAX_LEVEL: usize = 3;
pub const DEFAULT_BLUR_SIGMA: f64 = 10.0;
pub const DEFAULT_BLUR_RADIUS: usize = 20;

/// Planar RGB image with three row-major channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    channels: [Vec<f64>; 3],
}

impl RgbImage {
    pub fn new(height: usize, width: usize, channels: [Vec<f64>; 3]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid(format!("image dimensions must be positive, got {height}x{width}")));
        }
        if channels.iter().any(|c| c.len() != height * width) {
            return Err(invalid(format!("channel buffers must each hold {} samples", height * width)));
        }
        Ok(Self { height, width, channels })
    }

    /// Image whose pixel at `(y, x)` is `f(y, x)`.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut channels = [
            Vec::with_capacity(height * width),
            Vec::with_capacity(height * width),
            Vec::with_capacity(height * width),
        ];
        for y in 0..height {
            for x in 0..width {
                let px = f(y, x);
                for (c, v) in channels.iter_mut().zip(px) {
                    c.push(v);
                }
            }
        }
        Self { height, width, channels }
    }

    /// Uniform gray image.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self::from_fn(height, width, |_, _| [value; 3])
    }

    /// Replicates a single-channel image into all three channels.
    pub fn from_gray(gray: &GrayImage) -> Self {
        let p = gray.pixels().to_vec();
        Self { height: gray.height(), width: gray.width(), channels: [p.clone(), p.clone(), p] }
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

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> [f64; 3] {
        let i = y * self.width + x;
        [self.channels[0][i], self.channels[1][i], self.channels[2][i]]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, px: [f64; 3]) {
        let i = y * self.width + x;
        for (c, v) in self.channels.iter_mut().zip(px) {
            c[i] = v;
        }
    }

    /// Applies `f` to every sample of every channel.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let channels = [0, 1, 2].map(|c| self.channels[c].iter().map(|&v| f(v)).collect());
        Self { height: self.height, width: self.width, channels }
    }

    /// Checks that every sample is finite and inside `[0, 1]`.
    pub fn check_unit_range(&self) -> Result<()> {
        for (c, channel) in self.channels.iter().enumerate() {
            if let Some(i) = channel.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(invalid(format!(
                    "pixel ({}, {}) channel {c} is {} which is outside [0, 1]",
                    i / self.width,
                    i % self.width,
                    channel[i]
                )));
            }
        }
        Ok(())
    }
}

/// Non-negative spectral intensity per coefficient position.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap(GrayImage);

impl IntensityMap {
    pub fn new(values: GrayImage) -> Result<Self> {
        if values.pixels().iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(invalid("intensity values must be non-negative"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &GrayImage {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }
}

/// Grid of `{0, 1}` flags marking detected pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(height: usize, width: usize) -> Self {
        Self { height, width, bits: vec![false; height * width] }
    }

    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(invalid(format!("mask buffer has {} bits, expected {}", bits.len(), height * width)));
        }
        Ok(Self { height, width, bits })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Fraction of pixels that are set.
    pub fn coverage(&self) -> f64 {
        self.count() as f64 / self.bits.len() as f64
    }

    /// Number of set bits inside the half-open rectangle `[y0, y1) × [x0, x1)`.
    pub fn count_in(&self, y0: usize, y1: usize, x0: usize, x1: usize) -> usize {
        let (y1, x1) = (y1.min(self.height), x1.min(self.width));
        (y0..y1).map(|y| (x0..x1).filter(|&x| self.get(y, x)).count()).sum()
    }

    /// Top-left `height × width` sub-mask.
    pub fn crop(&self, height: usize, width: usize) -> Result<Self> {
        if height > self.height || width > self.width {
            return Err(invalid(format!("cannot crop {}x{} mask to {height}x{width}", self.height, self.width)));
        }
        let mut out = Self::empty(height, width);
        for y in 0..height {
            out.bits[y * width..(y + 1) * width].copy_from_slice(&self.bits[y * self.width..y * self.width + width]);
        }
        Ok(out)
    }

    /// Set-wise union with a mask of the same size.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(invalid(format!("cannot union {:?} mask with {:?} mask", self.dims(), other.dims())));
        }
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// `0 → 0`, `1 → 255`, row-major.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// Parameters of a single masking pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    pub theta: f64,
    /// Maximum decomposition level; `0` disables masking.
    pub n: usize,
    pub blur_sigma: f64,
    pub blur_radius: usize,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            n: DEFAULT_MAX_LEVEL,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            blur_radius: DEFAULT_BLUR_RADIUS,
        }
    }
}

impl MaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta <= 0.0 || !self.theta.is_finite() {
            return Err(invalid(format!("theta must be positive, got {}", self.theta)));
        }
        if self.blur_sigma <= 0.0 || !self.blur_sigma.is_finite() {
            return Err(invalid(format!("blur sigma must be positive, got {}", self.blur_sigma)));
        }
        if self.blur_radius < 1 {
            return Err(invalid("blur radius must be at least 1"));
        }
        if self.n > 30 {
            return Err(invalid(format!("decomposition depth {} is too large", self.n)));
        }
        Ok(())
    }
}

/// Luma conversion.
///
/// Evaluated as `r + w_g (g - r) + w_b (b - r)`, which equals the weighted sum
/// but returns gray inputs unchanged bit for bit.
pub fn to_grayscale(image: &RgbImage) -> GrayImage {
    let [_, wg, wb] = LUMA_WEIGHTS;
    let [r, g, b] = image.channels();
    let pixels =
        r.iter().zip(g).zip(b).map(|((&r, &g), &b)| (r + wg * (g - r) + wb * (b - r)).clamp(0.0, 1.0)).collect();
    GrayImage::new(image.height(), image.width(), pixels).expect("dimensions preserved")
}

/// Per-pixel l2 norm across the three detail directions.
pub fn intensity_map(details: &DetailTriple) -> IntensityMap {
    let (h, w) = details.dims();
    let pixels = details
        .d_h
        .pixels()
        .iter()
        .zip(details.d_v.pixels())
        .zip(details.d_d.pixels())
        .map(|((&a, &b), &c)| (a * a + b * b + c * c).sqrt())
        .collect();
    IntensityMap(GrayImage::new(h, w, pixels).expect("dimensions preserved"))
}

/// 3×3 box mean with edge replication.
pub fn smooth(map: &IntensityMap) -> IntensityMap {
    let src = map.values();
    let (h, w) = src.dims();
    let out = GrayImage::from_fn(h, w, |y, x| {
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for dy in [-1isize, 0, 1] {
            let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
            for dx in [-1isize, 0, 1] {
                let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                let v = src.get(yy, xx);
                sum += v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        // rounding in the sum must not lift the mean above its neighborhood
        (sum / 9.0).clamp(lo, hi)
    });
    IntensityMap(out)
}

/// Threshold for level `level` (1-based): `2^(level-1) θ`.
pub fn level_threshold(theta: f64, level: usize) -> f64 {
    assert!(level >= 1, "levels are 1-based");
    theta * 2f64.powi(level as i32 - 1)
}

/// Marks coefficients strictly above the level threshold.
pub fn threshold_mask(map: &IntensityMap, level: usize, theta: f64) -> BinaryMask {
    let t = level_threshold(theta, level);
    let (h, w) = map.dims();
    BinaryMask { height: h, width: w, bits: map.values().pixels().iter().map(|&v| v > t).collect() }
}

/// Upsamples `masks[i - 1]` (level `i`) to `target` by `2^i × 2^i` replication
/// and takes the union.
pub fn fuse_masks(masks: &[BinaryMask], target: (usize, usize)) -> Result<BinaryMask> {
    let (th, tw) = target;
    let mut fused = BinaryMask::empty(th, tw);
    for (k, mask) in masks.iter().enumerate() {
        let level = k + 1;
        let scale = 1usize << level;
        if th % scale != 0 || tw % scale != 0 || mask.dims() != (th / scale, tw / scale) {
            return Err(invalid(format!(
                "level {level} mask is {:?}, expected {:?} for target {th}x{tw}",
                mask.dims(),
                (th / scale, tw / scale)
            )));
        }
        for y in 0..th {
            let src_row = &mask.bits[(y / scale) * mask.width..(y / scale + 1) * mask.width];
            let dst_row = &mut fused.bits[y * tw..(y + 1) * tw];
            for (x, d) in dst_row.iter_mut().enumerate() {
                *d |= src_row[x / scale];
            }
        }
    }
    Ok(fused)
}

/// Normalized 1D Gaussian taps for offsets `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut taps: Vec<f64> = (-r..=r).map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Separable Gaussian blur of each channel with edge-replicated borders.
pub fn gaussian_blur(image: &RgbImage, sigma: f64, radius: usize) -> Result<RgbImage> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(invalid(format!("blur sigma must be positive, got {sigma}")));
    }
    let kernel = gaussian_kernel(sigma, radius);
    let (h, w) = image.dims();
    let channels = [0, 1, 2].map(|c| blur_plane(&image.channels[c], h, w, &kernel, radius));
    Ok(RgbImage { height: h, width: w, channels })
}

fn blur_plane(src: &[f64], h: usize, w: usize, kernel: &[f64], radius: usize) -> Vec<f64> {
    // horizontal pass over an edge-extended row buffer
    let mut tmp = vec![0.0; h * w];
    let mut ext = vec![0.0; w + 2 * radius];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        ext[..radius].fill(row[0]);
        ext[radius..radius + w].copy_from_slice(row);
        ext[radius + w..].fill(row[w - 1]);
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            *o = ext[x..x + kernel.len()].iter().zip(kernel).map(|(a, k)| a * k).sum();
        }
    }
    // vertical pass, accumulating whole rows
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        let dst = &mut out[y * w..(y + 1) * w];
        for (j, &k) in kernel.iter().enumerate() {
            let yy = (y + j).saturating_sub(radius).min(h - 1);
            let src_row = &tmp[yy * w..(yy + 1) * w];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += k * s;
            }
        }
    }
    out
}

/// Fused full-resolution mask of a grayscale image at maximum depth `n`.
///
/// The mask is computed on the padded image and cropped back to the input size.
pub fn spectral_mask(gray: &GrayImage, n: usize, theta: f64) -> Result<BinaryMask> {
    let (h, w) = gray.dims();
    if n == 0 {
        return Ok(BinaryMask::empty(h, w));
    }
    let (padded, _) = pad_to_divisible(gray, n);
    let pyramid = decompose(&padded, n)?;
    let masks: Vec<BinaryMask> = pyramid
        .levels
        .iter()
        .enumerate()
        .map(|(k, details)| threshold_mask(&smooth(&intensity_map(details)), k + 1, theta))
        .collect();
    fuse_masks(&masks, padded.dims())?.crop(h, w)
}

/// Replaces masked pixels of `image` by the corresponding pixels of `blurred`.
pub fn blend(image: &RgbImage, blurred: &RgbImage, mask: &BinaryMask) -> Result<RgbImage> {
    if image.dims() != blurred.dims() || image.dims() != mask.dims() {
        return Err(invalid("image, blurred image and mask must share dimensions"));
    }
    let mut out = image.clone();
    for c in 0..3 {
        for ((o, &b), &m) in out.channels[c].iter_mut().zip(&blurred.channels[c]).zip(&mask.bits) {
            if m {
                *o = b;
            }
        }
    }
    Ok(out)
}

/// One full masking pass: returns the defended image and the fused mask.
///
/// Pixels outside the mask are returned unchanged.
pub fn asd_mask(image: &RgbImage, config: &MaskConfig) -> Result<(RgbImage, BinaryMask)> {
    config.validate()?;
    image.check_unit_range()?;
    let (h, w) = image.dims();
    if config.n == 0 {
        return Ok((image.clone(), BinaryMask::empty(h, w)));
    }
    let mask = spectral_mask(&to_grayscale(image), config.n, config.theta)?;
    if mask.is_empty() {
        return Ok((image.clone(), mask));
    }
    let blurred = gaussian_blur(image, config.blur_sigma, config.blur_radius)?;
    Ok((blend(image, &blurred, &mask)?, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_of(h: usize, w: usize, f: impl FnMut(usize, usize) -> f64) -> IntensityMap {
        IntensityMap::new(GrayImage::from_fn(h, w, f)).unwrap()
    }

    #[test]
    fn grayscale_examples() {
        assert!(to_grayscale(&RgbImage::filled(3, 3, 1.0)).pixels().iter().all(|&v| v == 1.0));
        assert!(to_grayscale(&RgbImage::filled(3, 3, 0.0)).pixels().iter().all(|&v| v == 0.0));
        let red = RgbImage::from_fn(2, 2, |_, _| [1.0, 0.0, 0.0]);
        assert!(to_grayscale(&red).pixels().iter().all(|&v| (v - 0.299).abs() < 1e-12));
        let mixed = RgbImage::from_fn(1, 1, |_, _| [0.2, 0.6, 0.9]);
        let expect = 0.299 * 0.2 + 0.587 * 0.6 + 0.114 * 0.9;
        assert!((to_grayscale(&mixed).get(0, 0) - expect).abs() < 1e-12);
    }

    #[test]
    fn intensity_examples() {
        let g = |v| GrayImage::filled(1, 1, v);
        let t = DetailTriple::new(g(3.0), g(4.0), g(0.0)).unwrap();
        assert_eq!(intensity_map(&t).values().pixels(), &[5.0]);
        let t = DetailTriple::new(g(0.0), g(0.0), g(0.0)).unwrap();
        assert_eq!(intensity_map(&t).values().pixels(), &[0.0]);
        let eps = 0.085;
        let t = DetailTriple::new(g(2.0 * eps), g(0.0), g(0.0)).unwrap();
        assert_eq!(intensity_map(&t).values().pixels(), &[2.0 * eps]);
    }

    #[test]
    fn smoothing_examples() {
        let flat = smooth(&map_of(5, 5, |_, _| 0.17));
        assert!(flat.values().pixels().iter().all(|&v| v == 0.17));

        let spike = smooth(&map_of(7, 7, |y, x| if (y, x) == (3, 3) { 0.9 } else { 0.0 }));
        for y in 0..7 {
            for x in 0..7 {
                let expect = if (2..=4).contains(&y) && (2..=4).contains(&x) { 0.1 } else { 0.0 };
                assert!((spike.values().get(y, x) - expect).abs() < 1e-15, "({y},{x})");
            }
        }

        let corner = smooth(&map_of(4, 4, |_, _| 2.5));
        assert_eq!(corner.values().get(0, 0), 2.5);
    }

    #[test]
    fn thresholds_double_per_level() {
        assert_eq!(level_threshold(0.17, 1), 0.17);
        assert_eq!(level_threshold(0.17, 2), 0.34);
        assert_eq!(level_threshold(0.17, 3), 0.68);

        let m = map_of(1, 2, |_, x| if x == 0 { 0.17 } else { 0.1701 });
        let mask = threshold_mask(&m, 1, 0.17);
        assert_eq!(mask.bits(), &[false, true]);

        let zero = threshold_mask(&map_of(3, 3, |_, _| 0.0), 2, 0.17);
        assert!(zero.is_empty());
    }

    #[test]
    fn fusion_examples() {
        let all_zero = fuse_masks(&[BinaryMask::empty(2, 2), BinaryMask::empty(1, 1)], (4, 4)).unwrap();
        assert!(all_zero.is_empty());

        let mut l1 = BinaryMask::empty(2, 2);
        l1.set(0, 0, true);
        let fused = fuse_masks(&[l1, BinaryMask::empty(1, 1)], (4, 4)).unwrap();
        let on: Vec<_> = (0..4).flat_map(|y| (0..4).map(move |x| (y, x))).filter(|&(y, x)| fused.get(y, x)).collect();
        assert_eq!(on, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);

        let mut l2 = BinaryMask::empty(1, 1);
        l2.set(0, 0, true);
        let fused = fuse_masks(&[BinaryMask::empty(2, 2), l2], (4, 4)).unwrap();
        assert_eq!(fused.count(), 16);

        assert!(fuse_masks(&[BinaryMask::empty(3, 2)], (4, 4)).is_err());
        assert!(fuse_masks(&[BinaryMask::empty(2, 2)], (5, 4)).is_err());
    }

    #[test]
    fn blur_preserves_constants_and_range() {
        let flat = RgbImage::filled(9, 11, 0.4);
        let out = gaussian_blur(&flat, 2.0, 4).unwrap();
        for c in 0..3 {
            assert!(out.channel(c).iter().all(|&v| (v - 0.4).abs() < 1e-14));
        }

        let noisy = RgbImage::from_fn(12, 12, |y, x| {
            let v = ((y * 31 + x * 17) % 13) as f64 / 12.0;
            [v, 1.0 - v, 0.5 * v]
        });
        let out = gaussian_blur(&noisy, 1.5, 3).unwrap();
        for c in 0..3 {
            let lo = noisy.channel(c).iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = noisy.channel(c).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(out.channel(c).iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
        }
        assert!(gaussian_blur(&noisy, 0.0, 3).is_err());
    }

    #[test]
    fn blur_impulse_matches_gaussian_peak() {
        // independent 2D kernel: exp(-(x^2+y^2)/2) normalized over the 7x7 support
        let mut total = 0.0;
        for y in -3i32..=3 {
            for x in -3i32..=3 {
                total += (-f64::from(x * x + y * y) / 2.0).exp();
            }
        }
        let peak = 1.0 / total;

        let impulse = RgbImage::from_fn(15, 15, |y, x| if (y, x) == (7, 7) { [1.0; 3] } else { [0.0; 3] });
        let out = gaussian_blur(&impulse, 1.0, 3).unwrap();
        assert!((out.get(7, 7)[0] - peak).abs() < 1e-12);
        let kernel = gaussian_kernel(1.0, 3);
        assert!((kernel.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn level_zero_is_identity() {
        let img = RgbImage::from_fn(10, 10, |y, x| [((x + y) % 2) as f64; 3]);
        let cfg = MaskConfig { n: 0, ..MaskConfig::default() };
        let (out, mask) = asd_mask(&img, &cfg).unwrap();
        assert_eq!(out, img);
        assert!(mask.is_empty());
        assert_eq!(mask.dims(), (10, 10));
    }

    #[test]
    fn constant_image_produces_no_mask() {
        let img = RgbImage::filled(32, 32, 0.37);
        let (out, mask) = asd_mask(&img, &MaskConfig::default()).unwrap();
        assert!(mask.is_empty());
        assert_eq!(out, img);
    }

    #[test]
    fn checkerboard_is_masked_and_blurred_only_inside() {
        let img = RgbImage::from_fn(32, 32, |y, x| {
            if (8..24).contains(&y) && (8..24).contains(&x) {
                [((x + y) % 2) as f64; 3]
            } else {
                [0.5; 3]
            }
        });
        let (out, mask) = asd_mask(&img, &MaskConfig::default()).unwrap();
        assert_eq!(mask.count_in(8, 24, 8, 24), 16 * 16);
        for y in 0..32 {
            for x in 0..32 {
                if !mask.get(y, x) {
                    assert_eq!(out.get(y, x), img.get(y, x));
                }
            }
        }
    }

    #[test]
    fn mask_is_cropped_to_input_size() {
        let img = RgbImage::from_fn(13, 19, |y, x| [((x * y) % 3) as f64 / 2.0; 3]);
        let (out, mask) = asd_mask(&img, &MaskConfig::default()).unwrap();
        assert_eq!(mask.dims(), (13, 19));
        assert_eq!(out.dims(), (13, 19));
    }

    #[test]
    fn rejects_out_of_range_input() {
        let img = RgbImage::filled(8, 8, 1.5);
        assert!(asd_mask(&img, &MaskConfig::default()).is_err());
        let bad = MaskConfig { theta: 0.0, ..MaskConfig::default() };
        assert!(asd_mask(&RgbImage::filled(8, 8, 0.5), &bad).is_err());
    }

    #[test]
    fn mask_export_is_zero_or_full() {
        let mut m = BinaryMask::empty(1, 3);
        m.set(0, 1, true);
        assert_eq!(m.to_gray8(), vec![0, 255, 0]);
    }
}
