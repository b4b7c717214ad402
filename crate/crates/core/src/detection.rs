//! Boxes, IoU, class-aware NMS and multi-level aggregation.
//!
//! [`detect_with_asd`] runs the masking pass once per configured depth
//! (depth `0` passes the image through untouched), feeds every defended
//! image to the same detector, pools all boxes and suppresses duplicates
//! once with NMS.

use std::cmp::Ordering;
use std::io::Write;
use std::process::Command;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, AsdError, Result};
use crate::spectral_mask::{asd_mask, MaskConfig, RgbImage, DEFAULT_BLUR_RADIUS, DEFAULT_BLUR_SIGMA, DEFAULT_THETA};

pub const DEFAULT_NMS_IOU: f64 = 0.4;
pub const DEFAULT_LEVELS: [u32; 4] = [0, 1, 2, 3];

/// Axis-aligned detection in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    #[serde(default = "unit_score")]
    pub score: f64,
    #[serde(default)]
    pub label: u32,
}

fn unit_score() -> f64 {
    1.0
}

impl BoundingBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, score: f64, label: u32) -> Result<Self> {
        let b = Self { x1, y1, x2, y2, score, label };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.x1, self.y1, self.x2, self.y2];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid(format!("box has non-finite coordinates: {self:?}")));
        }
        if !(self.x1 < self.x2 && self.y1 < self.y2) {
            return Err(invalid(format!("box corners are not ordered: {self:?}")));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(invalid(format!("box score {} outside [0, 1]", self.score)));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Area of the overlap with `other`.
    pub fn intersection(&self, other: &BoundingBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = score;
        self
    }
}

/// Boxes produced by one detector invocation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub boxes: Vec<BoundingBox>,
    /// Decomposition depth of the defended image the boxes came from.
    #[serde(default)]
    pub source_level: u32,
}

/// Configuration of the whole defended detection pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AsdConfig {
    pub theta: f64,
    /// Maximum depths `n_1..n_k`; `0` means the undefended image.
    pub levels: Vec<u32>,
    pub nms_iou: f64,
    pub blur_sigma: f64,
    pub blur_radius: usize,
}

impl Default for AsdConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            levels: DEFAULT_LEVELS.to_vec(),
            nms_iou: DEFAULT_NMS_IOU,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            blur_radius: DEFAULT_BLUR_RADIUS,
        }
    }
}

impl AsdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(invalid("at least one decomposition level is required"));
        }
        let mut seen = self.levels.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("decomposition levels must be distinct: {:?}", self.levels)));
        }
        if !(self.nms_iou > 0.0 && self.nms_iou < 1.0) {
            return Err(invalid(format!("NMS IoU threshold must lie in (0, 1), got {}", self.nms_iou)));
        }
        for &n in &self.levels {
            self.mask_config(n).validate()?;
        }
        Ok(())
    }

    /// Masking parameters for maximum depth `n`.
    pub fn mask_config(&self, n: u32) -> MaskConfig {
        MaskConfig { theta: self.theta, n: n as usize, blur_sigma: self.blur_sigma, blur_radius: self.blur_radius }
    }
}

/// Intersection over union, `0` for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Total order used to rank boxes: descending score, then ascending
/// `(x1, y1, x2, y2, label)`.
pub fn canonical_order(a: &BoundingBox, b: &BoundingBox) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.x1.total_cmp(&b.x1))
        .then(a.y1.total_cmp(&b.y1))
        .then(a.x2.total_cmp(&b.x2))
        .then(a.y2.total_cmp(&b.y2))
        .then(a.label.cmp(&b.label))
}

/// Greedy class-aware non-maximum suppression.
///
/// A box survives unless a higher-ranked surviving box of the same label
/// overlaps it with IoU `>= iou_threshold`. Output is in canonical order.
pub fn nms(boxes: &[BoundingBox], iou_threshold: f64) -> Vec<BoundingBox> {
    let mut ranked = boxes.to_vec();
    ranked.sort_by(canonical_order);
    let mut kept: Vec<BoundingBox> = Vec::with_capacity(ranked.len());
    for candidate in ranked {
        let suppressed = kept.iter().any(|k| k.label == candidate.label && iou(k, &candidate) >= iou_threshold);
        if !suppressed {
            kept.push(candidate);
        }
    }
    kept
}

/// A detector the pipeline can call on defended images.
///
/// Implementations must be usable from several threads at once; levels are
/// processed in parallel.
pub trait Detector: Sync {
    fn run(&self, image: &RgbImage) -> Result<DetectionSet>;

    /// Whether identical pixels always yield identical boxes.
    fn is_deterministic(&self) -> bool {
        true
    }
}

impl<D: Detector + ?Sized> Detector for &D {
    fn run(&self, image: &RgbImage) -> Result<DetectionSet> {
        (**self).run(image)
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

/// Full defended detection: mask at every configured depth, detect, pool, NMS.
pub fn detect_with_asd<D: Detector + ?Sized>(
    image: &RgbImage,
    detector: &D,
    config: &AsdConfig,
) -> Result<Vec<BoundingBox>> {
    config.validate()?;
    image.check_unit_range()?;
    let per_level: Vec<Result<DetectionSet>> = config
        .levels
        .par_iter()
        .map(|&level| {
            let defended = if level == 0 { image.clone() } else { asd_mask(image, &config.mask_config(level))?.0 };
            let mut set =
                detector.run(&defended).map_err(|e| AsdError::Aggregation { level, message: e.to_string() })?;
            set.source_level = level;
            Ok(set)
        })
        .collect();
    let mut pooled = Vec::new();
    for set in per_level {
        pooled.extend(set?.boxes);
    }
    Ok(nms(&pooled, config.nms_iou))
}

#[derive(Debug, Deserialize)]
struct SubprocessOutput {
    boxes: Vec<BoundingBox>,
}

/// External detector invoked as `<cmd> <image-path>` per image.
///
/// The image is written to a temporary 8-bit PNG; the command must print
/// `{"boxes": [{"x1":..,"y1":..,"x2":..,"y2":..,"score":..,"label":..}]}`.
#[derive(Debug, Clone)]
pub struct SubprocessDetector {
    program: String,
    args: Vec<String>,
}

impl SubprocessDetector {
    /// Parses a whitespace-separated command line.
    pub fn new(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace().map(str::to_owned);
        let program = parts.next().ok_or_else(|| invalid("detector command is empty"))?;
        Ok(Self { program, args: parts.collect() })
    }

    /// Parses the detector's standard output.
    pub fn parse_output(stdout: &[u8]) -> Result<DetectionSet> {
        let parsed: SubprocessOutput = serde_json::from_slice(stdout)
            .map_err(|e| AsdError::Detector(format!("unparseable detector output: {e}")))?;
        for b in &parsed.boxes {
            b.validate().map_err(|e| AsdError::Detector(e.to_string()))?;
        }
        Ok(DetectionSet { boxes: parsed.boxes, source_level: 0 })
    }
}

impl Detector for SubprocessDetector {
    fn run(&self, image: &RgbImage) -> Result<DetectionSet> {
        let mut file = tempfile::Builder::new()
            .prefix("asd-detect-")
            .suffix(".png")
            .tempfile()
            .map_err(|e| AsdError::Detector(format!("cannot create temporary image: {e}")))?;
        let png = crate::harness::io::encode_png(image)?;
        file.write_all(&png)
            .and_then(|_| file.flush())
            .map_err(|e| AsdError::Detector(format!("cannot write temporary image: {e}")))?;
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(file.path())
            .output()
            .map_err(|e| AsdError::Detector(format!("cannot spawn `{}`: {e}", self.program)))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(AsdError::Detector(format!(
                "`{}` exited with {}: {}",
                self.program,
                output.status,
                stderr.trim()
            )));
        }
        Self::parse_output(&output.stdout)
    }
}
