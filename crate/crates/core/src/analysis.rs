//! Spectral amplitude statistics, the detail-energy loss, and a falsification
//! harness for the per-level amplitude bound.
//!
//! For a perturbation with `‖δ‖∞ ≤ ε`, every level-`i` detail coefficient,
//! and the l2 norm over the three directions at every position, is at most
//! `2^i ε`. One 2×2 step maps a block with entries in `[-m, m]` to outputs of
//! magnitude at most `2m`, equality being reached by the sign patterns
//! `[[-1, 1], [-1, 1]]`, `[[-1, -1], [1, 1]]`, `[[1, -1], [-1, 1]]` (details)
//! and `[[1, 1], [1, 1]]` (approximation), scaled by `m`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral_mask::{gaussian_blur, RgbImage};
use crate::wavelet::{decompose, dwt_step_2d, pad_to_divisible, GrayImage, WaveletPyramid};

pub const SCHEMA_VERSION: u32 = 1;

/// Slack allowed on the bound before a report counts as a violation.
pub const BOUND_SLACK: f64 = 1e-9;

pub const DEFAULT_BOUND_SEED: u64 = 0x5eed_a5d0;

/// Per-level mean absolute detail amplitude, scaled by `10 / 2^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralStats {
    pub per_level_mean: Vec<f64>,
    /// Half-width of the normal-approximation 95% interval across per-patch means.
    pub per_level_ci95: Vec<f64>,
    pub patches: usize,
}

impl SpectralStats {
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>5}  {:>12}  {:>12}\n", "level", "mean", "ci95");
        for (i, (m, c)) in self.per_level_mean.iter().zip(&self.per_level_ci95).enumerate() {
            let _ = writeln!(out, "{:>5}  {:>12.6}  {:>12.6}", i + 1, m, c);
        }
        out
    }
}

/// Outcome of [`verify_amplitude_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub levels_checked: usize,
    pub trials: usize,
    pub size: (usize, usize),
    pub seed: u64,
    /// Largest single-step detail magnitude over the 16 `±ε` sign patterns.
    pub extremal_max_detail: f64,
    /// Largest single-step approximation magnitude over the same patterns.
    pub extremal_max_approx: f64,
    /// Worst `‖D_i‖∞ / (2^i ε)` seen over all patterns, trials and levels.
    pub max_observed_ratio: f64,
    pub violated: bool,
}

impl BoundReport {
    pub fn to_text(&self) -> String {
        let rows = [
            ("epsilon", format!("{}", self.epsilon)),
            ("levels_checked", self.levels_checked.to_string()),
            ("trials", self.trials.to_string()),
            ("size", format!("{}x{}", self.size.0, self.size.1)),
            ("seed", self.seed.to_string()),
            ("extremal_max_detail", format!("{:.15}", self.extremal_max_detail)),
            ("extremal_max_approx", format!("{:.15}", self.extremal_max_approx)),
            ("max_observed_ratio", format!("{:.15}", self.max_observed_ratio)),
            ("violated", self.violated.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<20}  {v}");
        }
        out
    }
}

/// Mean absolute detail amplitude per level over a set of patches.
///
/// The mean pools every coefficient of every direction and patch; the
/// interval uses the spread of per-patch means. Patches not divisible by
/// `2^n` are edge-padded first.
pub fn spectral_stats(patches: &[GrayImage], n: usize) -> Result<SpectralStats> {
    if patches.is_empty() {
        return Err(invalid("spectral statistics need at least one patch"));
    }
    if n == 0 {
        return Err(invalid("spectral statistics need at least one level"));
    }
    // per patch, per level: (sum of |coefficient|, coefficient count)
    let sums: Vec<Vec<(f64, usize)>> = patches
        .iter()
        .map(|p| {
            let pyramid = decompose(&pad_to_divisible(p, n).0, n)?;
            Ok(pyramid
                .levels
                .iter()
                .map(|t| {
                    let s: f64 = t.bands().iter().flat_map(|b| b.pixels()).map(|v| v.abs()).sum();
                    (s, 3 * t.d_h.pixels().len())
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut per_level_mean = Vec::with_capacity(n);
    let mut per_level_ci95 = Vec::with_capacity(n);
    for level in 0..n {
        let scale = 10.0 / f64::from(1u32 << (level + 1));
        let (total, count) = sums.iter().fold((0.0, 0usize), |(s, c), p| (s + p[level].0, c + p[level].1));
        per_level_mean.push(scale * total / count as f64);

        let means: Vec<f64> = sums.iter().map(|p| scale * p[level].0 / p[level].1 as f64).collect();
        per_level_ci95.push(ci95_half_width(&means));
    }
    Ok(SpectralStats { per_level_mean, per_level_ci95, patches: patches.len() })
}

fn ci95_half_width(samples: &[f64]) -> f64 {
    let k = samples.len();
    if k < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / k as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    1.96 * (var / k as f64).sqrt()
}

/// `Σ_i 2^-i (‖D_i^h‖² + ‖D_i^v‖² + ‖D_i^d‖²)`.
pub fn dwt_loss(pyramid: &WaveletPyramid) -> f64 {
    pyramid
        .levels
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let energy: f64 = t.bands().iter().flat_map(|b| b.pixels()).map(|v| v * v).sum();
            energy / f64::from(1u32 << (k + 1))
        })
        .sum()
}

/// Worst ratio `‖D_i‖∞ / (2^i ε)` over levels `1..=n` of a perturbation.
///
/// Both the per-direction magnitudes and the l2 norm across directions are
/// checked; the latter dominates.
pub fn amplitude_ratio(perturbation: &GrayImage, epsilon: f64, n: usize) -> Result<f64> {
    let pyramid = decompose(perturbation, n)?;
    let mut worst = 0.0f64;
    for (k, t) in pyramid.levels.iter().enumerate() {
        let bound = epsilon * f64::from(1u32 << (k + 1));
        let peak = t
            .d_h
            .pixels()
            .iter()
            .zip(t.d_v.pixels())
            .zip(t.d_d.pixels())
            .map(|((&h, &v), &d)| {
                let l2 = (h * h + v * v + d * d).sqrt();
                l2.max(h.abs()).max(v.abs()).max(d.abs())
            })
            .fold(0.0, f64::max);
        worst = worst.max(peak / bound);
    }
    Ok(worst)
}

/// The 16 2×2 blocks with entries in `{-ε, +ε}`, row-major `[a, b, c, d]`.
pub fn sign_patterns(epsilon: f64) -> Vec<[f64; 4]> {
    (0u8..16).map(|bits| [0, 1, 2, 3].map(|k| if bits >> k & 1 == 1 { epsilon } else { -epsilon })).collect()
}

/// Checks the amplitude bound exhaustively on 2×2 sign patterns and by
/// random search on `trials` images of `size` with entries uniform in `[-ε, ε]`.
///
/// Trials draw from independent RNG streams keyed by trial index, so the
/// report does not depend on scheduling.
pub fn verify_amplitude_bound(
    epsilon: f64,
    n: usize,
    trials: usize,
    size: (usize, usize),
    seed: u64,
) -> Result<BoundReport> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if n == 0 || n > 20 {
        return Err(invalid(format!("level count must be in 1..=20, got {n}")));
    }
    let block = 1usize << n;
    let (h, w) = size;
    if h == 0 || w == 0 || h % block != 0 || w % block != 0 {
        return Err(invalid(format!("size {h}x{w} is not divisible by 2^{n}")));
    }

    let mut extremal_max_detail = 0.0f64;
    let mut extremal_max_approx = 0.0f64;
    for block in sign_patterns(epsilon) {
        let img = GrayImage::new(2, 2, block.to_vec())?;
        let (a, d) = dwt_step_2d(&img)?;
        let (dh, dv, dd) = (d.d_h.get(0, 0), d.d_v.get(0, 0), d.d_d.get(0, 0));
        let l2 = (dh * dh + dv * dv + dd * dd).sqrt();
        extremal_max_detail = extremal_max_detail.max(l2).max(dh.abs()).max(dv.abs()).max(dd.abs());
        extremal_max_approx = extremal_max_approx.max(a.get(0, 0).abs());
    }
    let extremal_ratio = extremal_max_detail.max(extremal_max_approx) / (2.0 * epsilon);

    let random_ratio = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let img = GrayImage::from_fn(h, w, |_, _| rng.random_range(-epsilon..=epsilon));
            amplitude_ratio(&img, epsilon, n)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    let max_observed_ratio = extremal_ratio.max(random_ratio);
    Ok(BoundReport {
        epsilon,
        levels_checked: n,
        trials,
        size,
        seed,
        extremal_max_detail,
        extremal_max_approx,
        max_observed_ratio,
        violated: max_observed_ratio > 1.0 + BOUND_SLACK,
    })
}

/// Seeded synthetic patch sets standing in for adversarial and benign content.
pub mod surrogates {
    use super::*;

    /// Independent uniform `[0, 1]` pixels: high contrast at every scale.
    pub fn adversarial_like(size: usize, rng: &mut impl Rng) -> GrayImage {
        GrayImage::from_fn(size, size, |_, _| rng.random_range(0.0..=1.0))
    }

    /// Uniform noise low-pass filtered with a Gaussian of width `sigma`.
    pub fn benign_like(size: usize, sigma: f64, rng: &mut impl Rng) -> GrayImage {
        let noise = RgbImage::from_gray(&adversarial_like(size, rng));
        let radius = (3.0 * sigma).ceil().max(1.0) as usize;
        let smooth = gaussian_blur(&noise, sigma, radius).expect("sigma is positive");
        GrayImage::new(size, size, smooth.channel(0).to_vec()).expect("dimensions preserved")
    }

    pub fn adversarial_set(count: usize, size: usize, seed: u64) -> Vec<GrayImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| adversarial_like(size, &mut rng)).collect()
    }

    pub fn benign_set(count: usize, size: usize, sigma: f64, seed: u64) -> Vec<GrayImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| benign_like(size, sigma, &mut rng)).collect()
    }
}
