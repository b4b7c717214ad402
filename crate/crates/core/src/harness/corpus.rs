//! Seeded synthetic scenes: smooth background, one flat-shaded object, and
//! optionally a patch inset inside the object.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detection::BoundingBox;
use crate::error::Result;
use crate::harness::patch::{inject_patch, PatchKind, PatchSpec};
use crate::spectral_mask::{gaussian_blur, RgbImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub size: usize,
    pub seed: u64,
    /// Patch placed inside each object; `None` builds a clean corpus.
    pub patch: Option<PatchTemplate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchTemplate {
    pub kind: PatchKind,
    pub amplitude: f64,
    pub period: usize,
    pub value_center: f64,
    /// Fraction of the object's width and height cut from each side.
    pub inset: f64,
}

impl Default for PatchTemplate {
    fn default() -> Self {
        Self { kind: PatchKind::Checkerboard, amplitude: 1.0, period: 2, value_center: 0.5, inset: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusImage {
    pub name: String,
    pub image: RgbImage,
    pub truth: Vec<BoundingBox>,
    pub patches: Vec<PatchSpec>,
}

/// Smooth noise background in roughly `[0.25, 0.75]`.
pub fn smooth_background(size: usize, rng: &mut impl Rng) -> RgbImage {
    let noise = RgbImage::from_fn(size, size, |_, _| {
        [rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)]
    });
    gaussian_blur(&noise, 4.0, 12).expect("sigma is positive").map(|v| (0.5 + (v - 0.5) * 2.0).clamp(0.25, 0.75))
}

pub fn generate(spec: &CorpusSpec) -> Result<Vec<CorpusImage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let size = spec.size as f64;
    (0..spec.count)
        .map(|i| {
            let mut image = smooth_background(spec.size, &mut rng);
            let w = (rng.random_range(0.3..0.6) * size).round();
            let h = (rng.random_range(0.3..0.6) * size).round();
            let x1 = rng.random_range(0.0..=(size - w)).floor();
            let y1 = rng.random_range(0.0..=(size - h)).floor();
            let object = BoundingBox::new(x1, y1, x1 + w, y1 + h, 1.0, 0)?;

            let shade: [f64; 3] =
                [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
            for y in y1 as usize..(y1 + h) as usize {
                for x in x1 as usize..(x1 + w) as usize {
                    let px = image.get(y, x);
                    image.set(y, x, [0, 1, 2].map(|c| (px[c] + shade[c]).clamp(0.0, 1.0)));
                }
            }

            // drawn unconditionally so clean and patched corpora share scenes
            let patch_seed: u64 = rng.random();
            let mut patches = Vec::new();
            if let Some(t) = &spec.patch {
                let (dx, dy) = ((w * t.inset).round(), (h * t.inset).round());
                let region = BoundingBox::new(x1 + dx, y1 + dy, x1 + w - dx, y1 + h - dy, 1.0, 0)?;
                let patch = PatchSpec {
                    kind: t.kind,
                    region,
                    amplitude: t.amplitude,
                    period: t.period,
                    value_center: t.value_center,
                };
                image = inject_patch(&image, &patch, patch_seed)?;
                patches.push(patch);
            }
            Ok(CorpusImage { name: format!("img_{i:04}.png"), image, truth: vec![object], patches })
        })
        .collect()
}

/// Ground-truth and patch manifests keyed by image name.
pub fn manifests(corpus: &[CorpusImage]) -> (BTreeMap<String, Vec<BoundingBox>>, BTreeMap<String, Vec<PatchSpec>>) {
    let gt = corpus.iter().map(|c| (c.name.clone(), c.truth.clone())).collect();
    let patches = corpus.iter().map(|c| (c.name.clone(), c.patches.clone())).collect();
    (gt, patches)
}
