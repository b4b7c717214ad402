//! Synthetic perturbation patches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detection::BoundingBox;
use crate::error::{invalid, Result};
use crate::spectral_mask::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchKind {
    /// Cells of `period / 2` px alternating `center - a/2` and `center + a/2`.
    Checkerboard,
    /// Independent uniform noise in `[center - a/2, center + a/2]` per pixel and channel.
    UniformNoise,
    /// A seeded random `period × period` tile repeated across the region.
    TiledTexture,
    /// Noise confined to `[center - a/2, center + a/2]` without clipping; with
    /// `a = θ` and `center = 0.5` it never trips the spectral threshold.
    RangeLimitedNoise,
}

impl std::str::FromStr for PatchKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "checkerboard" => Ok(Self::Checkerboard),
            "uniform-noise" => Ok(Self::UniformNoise),
            "tiled-texture" => Ok(Self::TiledTexture),
            "range-limited-noise" | "range-limited" => Ok(Self::RangeLimitedNoise),
            other => Err(format!("unknown patch kind `{other}`")),
        }
    }
}

/// Half-open pixel rectangle `[x1, x2) × [y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRegion {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
}

impl PixelRegion {
    /// Pixels whose centers lie inside `b`.
    pub fn from_box(b: &BoundingBox) -> Self {
        let lo = |v: f64| (v - 0.5).ceil().max(0.0) as usize;
        Self { x1: lo(b.x1), y1: lo(b.y1), x2: lo(b.x2), y2: lo(b.y2) }
    }

    pub fn to_box(&self) -> BoundingBox {
        BoundingBox {
            x1: self.x1 as f64,
            y1: self.y1 as f64,
            x2: self.x2 as f64,
            y2: self.y2 as f64,
            score: 1.0,
            label: 0,
        }
    }

    pub fn area(&self) -> usize {
        self.x2.saturating_sub(self.x1) * self.y2.saturating_sub(self.y1)
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        (self.y1..self.y2).contains(&y) && (self.x1..self.x2).contains(&x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub kind: PatchKind,
    pub region: BoundingBox,
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period: usize,
    #[serde(default = "default_center")]
    pub value_center: f64,
}

fn default_period() -> usize {
    2
}

fn default_center() -> f64 {
    0.5
}

impl PatchSpec {
    pub fn new(kind: PatchKind, region: BoundingBox, amplitude: f64) -> Self {
        Self { kind, region, amplitude, period: default_period(), value_center: default_center() }
    }

    /// Noise limited to `[0.5 - θ/2, 0.5 + θ/2]`.
    pub fn range_limited(region: BoundingBox, theta: f64) -> Self {
        Self::new(PatchKind::RangeLimitedNoise, region, theta)
    }

    pub fn pixel_region(&self) -> PixelRegion {
        PixelRegion::from_box(&self.region)
    }

    fn validate(&self, dims: (usize, usize)) -> Result<PixelRegion> {
        if self.amplitude < 0.0 || !self.amplitude.is_finite() {
            return Err(invalid(format!("patch amplitude must be non-negative, got {}", self.amplitude)));
        }
        if self.period == 0 {
            return Err(invalid("patch period must be positive"));
        }
        self.region.validate()?;
        let (h, w) = dims;
        if self.region.x1 < 0.0 || self.region.y1 < 0.0 || self.region.x2 > w as f64 || self.region.y2 > h as f64 {
            return Err(invalid(format!("patch region {:?} exceeds the {h}x{w} image", self.region)));
        }
        let region = self.pixel_region();
        if region.area() == 0 {
            return Err(invalid(format!("patch region {:?} covers no pixel", self.region)));
        }
        if self.kind == PatchKind::RangeLimitedNoise {
            let (lo, hi) = self.value_range();
            if lo < 0.0 || hi > 1.0 {
                return Err(invalid(format!("range-limited values [{lo}, {hi}] leave [0, 1]")));
            }
        }
        Ok(region)
    }

    fn value_range(&self) -> (f64, f64) {
        (self.value_center - self.amplitude / 2.0, self.value_center + self.amplitude / 2.0)
    }
}

/// Overwrites the patch region of `image`; pixels outside are untouched.
pub fn inject_patch(image: &RgbImage, spec: &PatchSpec, seed: u64) -> Result<RgbImage> {
    let region = spec.validate(image.dims())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = spec.value_range();
    let mut draw = move || if hi > lo { rng.random_range(lo..=hi) } else { lo };

    let p = spec.period;
    let tile: Vec<[f64; 3]> = match spec.kind {
        PatchKind::TiledTexture => (0..p * p).map(|_| [draw(), draw(), draw()]).collect(),
        _ => Vec::new(),
    };
    let cell = (p / 2).max(1);

    let mut out = image.clone();
    for y in region.y1..region.y2 {
        for x in region.x1..region.x2 {
            let (dy, dx) = (y - region.y1, x - region.x1);
            let px = match spec.kind {
                PatchKind::Checkerboard => {
                    let v = if (dy / cell + dx / cell).is_multiple_of(2) { lo } else { hi };
                    [v; 3]
                }
                PatchKind::UniformNoise | PatchKind::RangeLimitedNoise => [draw(), draw(), draw()],
                PatchKind::TiledTexture => tile[(dy % p) * p + dx % p],
            };
            out.set(y, x, px.map(|v| v.clamp(0.0, 1.0)));
        }
    }
    Ok(out)
}
