//! Ground truth files and single-class AP at IoU 0.5.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::{canonical_order, iou, BoundingBox};
use crate::error::{invalid, AsdError, Result};

pub const AP_IOU: f64 = 0.5;

/// Per-image detections keyed by image file name.
pub type Detections = BTreeMap<String, Vec<BoundingBox>>;

/// Ground-truth boxes keyed by image file name; scores are fixed at 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth(pub BTreeMap<String, Vec<BoundingBox>>);

impl GroundTruth {
    pub fn new(map: BTreeMap<String, Vec<BoundingBox>>) -> Result<Self> {
        let mut gt = Self(map);
        for boxes in gt.0.values_mut() {
            for b in boxes.iter_mut() {
                b.score = 1.0;
                b.validate()?;
            }
        }
        Ok(gt)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(AsdError::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|source| AsdError::Io { path: path.to_path_buf(), source })?;
        Self::new(serde_json::from_str(&text)?)
    }

    pub fn boxes(&self, image: &str) -> &[BoundingBox] {
        self.0.get(image).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_boxes(&self) -> usize {
        self.0.values().map(Vec::len).sum()
    }
}

/// All-point interpolated average precision at IoU 0.5, ignoring labels.
///
/// Detections are ranked by descending score across all images and matched
/// greedily, one-to-one, to the unmatched ground-truth box of highest IoU in
/// their image. Detections on images absent from `gt` count as false positives.
pub fn ap50(detections: &Detections, gt: &GroundTruth) -> Result<f64> {
    average_precision(detections, gt, AP_IOU)
}

pub fn average_precision(detections: &Detections, gt: &GroundTruth, iou_threshold: f64) -> Result<f64> {
    let total_gt = gt.total_boxes();
    if total_gt == 0 {
        return Err(invalid("ground truth contains no boxes"));
    }
    let mut ranked: Vec<(&str, &BoundingBox)> =
        detections.iter().flat_map(|(name, boxes)| boxes.iter().map(move |b| (name.as_str(), b))).collect();
    ranked.sort_by(|a, b| canonical_order(a.1, b.1).then(a.0.cmp(b.0)));

    let mut matched: BTreeMap<&str, Vec<bool>> = gt.0.iter().map(|(k, v)| (k.as_str(), vec![false; v.len()])).collect();
    let mut tp = 0usize;
    let mut curve = Vec::with_capacity(ranked.len());
    for (rank, (name, det)) in ranked.iter().enumerate() {
        let truth = gt.boxes(name);
        let best = truth
            .iter()
            .enumerate()
            .filter(|(j, _)| matched.get(name).is_some_and(|m| !m[*j]))
            .map(|(j, g)| (j, iou(det, g)))
            .filter(|&(_, o)| o >= iou_threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((j, _)) = best {
            matched.get_mut(name).expect("image has ground truth")[j] = true;
            tp += 1;
        }
        let precision = tp as f64 / (rank + 1) as f64;
        let recall = tp as f64 / total_gt as f64;
        curve.push((recall, precision));
    }

    // monotone envelope from the right, then sum precision over recall steps
    let mut envelope = 0.0f64;
    for point in curve.iter_mut().rev() {
        envelope = envelope.max(point.1);
        point.1 = envelope;
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (recall, precision) in curve {
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x1: f64, y1: f64, x2: f64, y2: f64, score: f64) -> BoundingBox {
        BoundingBox::new(x1, y1, x2, y2, score, 0).unwrap()
    }

    fn gt_of(entries: &[(&str, Vec<BoundingBox>)]) -> GroundTruth {
        GroundTruth::new(entries.iter().cloned().map(|(k, v)| (k.to_owned(), v)).collect()).unwrap()
    }

    #[test]
    fn perfect_detections() {
        let gt = gt_of(&[("a", vec![bx(0.0, 0.0, 10.0, 10.0, 1.0)]), ("b", vec![bx(5.0, 5.0, 9.0, 9.0, 1.0)])]);
        let dets = gt.0.clone();
        assert_eq!(ap50(&dets, &gt).unwrap(), 1.0);
    }

    #[test]
    fn no_detections() {
        let gt = gt_of(&[("a", vec![bx(0.0, 0.0, 10.0, 10.0, 1.0)])]);
        assert_eq!(ap50(&Detections::new(), &gt).unwrap(), 0.0);
    }

    #[test]
    fn higher_scored_false_positive_halves_ap() {
        let gt = gt_of(&[("a", vec![bx(0.0, 0.0, 10.0, 10.0, 1.0)])]);
        let dets: Detections =
            [("a".to_owned(), vec![bx(0.0, 0.0, 10.0, 10.0, 0.9), bx(50.0, 50.0, 60.0, 60.0, 0.95)])].into();
        assert!((ap50(&dets, &gt).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn duplicates_do_not_double_count() {
        let gt = gt_of(&[("a", vec![bx(0.0, 0.0, 10.0, 10.0, 1.0), bx(20.0, 0.0, 30.0, 10.0, 1.0)])]);
        let dets: Detections =
            [("a".to_owned(), vec![bx(0.0, 0.0, 10.0, 10.0, 0.9), bx(0.0, 0.0, 10.0, 10.0, 0.8)])].into();
        // TP at recall 0.5 with precision 1, then a FP
        assert!((ap50(&dets, &gt).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_images_are_false_positives() {
        let gt = gt_of(&[("a", vec![bx(0.0, 0.0, 10.0, 10.0, 1.0)])]);
        let dets: Detections = [
            ("a".to_owned(), vec![bx(0.0, 0.0, 10.0, 10.0, 0.5)]),
            ("zzz".to_owned(), vec![bx(0.0, 0.0, 10.0, 10.0, 0.9)]),
        ]
        .into();
        assert!((ap50(&dets, &gt).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        assert!(ap50(&Detections::new(), &GroundTruth::default()).is_err());
    }

    #[test]
    fn ground_truth_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.json");
        fs::write(&path, r#"{"img.png": [{"x1": 1, "y1": 2, "x2": 5, "y2": 6, "label": 0}]}"#).unwrap();
        let gt = GroundTruth::load(&path).unwrap();
        assert_eq!(gt.boxes("img.png"), &[bx(1.0, 2.0, 5.0, 6.0, 1.0)]);
        assert!(GroundTruth::load(dir.path().join("missing.json")).is_err());
    }
}
