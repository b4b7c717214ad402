//! Ground-truth oracle detector with an explicit patch-evasion rule.
//!
//! The oracle stands in for a neural detector. It knows the ground-truth
//! boxes, the injected patch regions and the attacked image. A patch counts
//! as neutralized once at least `restore_fraction` of its pixels differ from
//! the attacked image (they were blurred); otherwise it is live, and any box
//! whose area is covered by a live patch to at least `overlap_fraction` is
//! dropped.

use serde::{Deserialize, Serialize};

use crate::detection::{BoundingBox, DetectionSet, Detector};
use crate::error::{invalid, Result};
use crate::harness::patch::PixelRegion;
use crate::spectral_mask::RgbImage;

/// Pixels count as changed when any channel moves by more than this.
pub const CHANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvasionRule {
    pub overlap_fraction: f64,
    pub restore_fraction: f64,
}

impl Default for EvasionRule {
    fn default() -> Self {
        Self { overlap_fraction: 0.5, restore_fraction: 0.9 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleDetector {
    truth: Vec<BoundingBox>,
    patches: Vec<PixelRegion>,
    reference: RgbImage,
    rule: EvasionRule,
}

impl OracleDetector {
    /// `reference` is the attacked image as handed to the pipeline.
    pub fn new(
        truth: &[BoundingBox],
        patches: Vec<PixelRegion>,
        reference: RgbImage,
        rule: EvasionRule,
    ) -> Result<Self> {
        let (h, w) = reference.dims();
        if let Some(p) = patches.iter().find(|p| p.x2 > w || p.y2 > h || p.area() == 0) {
            return Err(invalid(format!("patch region {p:?} does not fit the {h}x{w} image")));
        }
        let truth = truth.iter().map(|b| b.with_score(1.0)).collect();
        Ok(Self { truth, patches, reference, rule })
    }

    /// Fraction of the patch's pixels that differ from the attacked image.
    pub fn blurred_fraction(&self, image: &RgbImage, patch: &PixelRegion) -> f64 {
        let mut changed = 0usize;
        for y in patch.y1..patch.y2 {
            for x in patch.x1..patch.x2 {
                let (a, b) = (image.get(y, x), self.reference.get(y, x));
                if a.iter().zip(&b).any(|(p, q)| (p - q).abs() > CHANGE_TOLERANCE) {
                    changed += 1;
                }
            }
        }
        changed as f64 / patch.area() as f64
    }

    fn live_patches(&self, image: &RgbImage) -> Vec<BoundingBox> {
        self.patches
            .iter()
            .filter(|p| self.blurred_fraction(image, p) < self.rule.restore_fraction)
            .map(PixelRegion::to_box)
            .collect()
    }
}

impl Detector for OracleDetector {
    fn run(&self, image: &RgbImage) -> Result<DetectionSet> {
        if image.dims() != self.reference.dims() {
            return Err(invalid(format!("oracle expects a {:?} image, got {:?}", self.reference.dims(), image.dims())));
        }
        let live = self.live_patches(image);
        let boxes = self
            .truth
            .iter()
            .filter(|b| !live.iter().any(|p| p.intersection(b) >= self.rule.overlap_fraction * b.area()))
            .copied()
            .collect();
        Ok(DetectionSet { boxes, source_level: 0 })
    }
}
