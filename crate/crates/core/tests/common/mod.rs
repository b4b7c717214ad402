#![allow(dead_code)]

use asd::detection::{canonical_order, BoundingBox};
use rand::Rng;

/// IoU computed from scratch, kept apart from the library's implementation.
pub fn reference_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    let area = |b: &BoundingBox| (b.x2 - b.x1) * (b.y2 - b.y1);
    inter / (area(a) + area(b) - inter)
}

/// Exhaustive reference for greedy NMS.
///
/// Enumerates every subset and returns the one that is self-consistent: a box
/// belongs to it exactly when no higher-ranked member with the same label
/// overlaps it at `>= thr`. Panics unless exactly one subset qualifies.
pub fn exhaustive_nms(boxes: &[BoundingBox], thr: f64) -> Vec<BoundingBox> {
    let mut ranked = boxes.to_vec();
    ranked.sort_by(canonical_order);
    let n = ranked.len();
    let mut found = Vec::new();
    for subset in 0u32..(1 << n) {
        let member = |i: usize| subset & (1 << i) != 0;
        let consistent = (0..n).all(|i| {
            let blocked = (0..i).any(|j| {
                member(j) && ranked[j].label == ranked[i].label && reference_iou(&ranked[j], &ranked[i]) >= thr
            });
            member(i) == !blocked
        });
        if consistent {
            found.push(subset);
        }
    }
    assert_eq!(found.len(), 1, "expected a unique fixed point");
    (0..n).filter(|i| found[0] & (1 << i) != 0).map(|i| ranked[i]).collect()
}

/// Random boxes on a coarse grid so ties and threshold-exact overlaps occur.
pub fn random_boxes(rng: &mut impl Rng, max: usize) -> Vec<BoundingBox> {
    let count = rng.random_range(0..=max);
    (0..count)
        .map(|_| {
            let x1 = rng.random_range(0..8) as f64;
            let y1 = rng.random_range(0..8) as f64;
            let w = rng.random_range(1..6) as f64;
            let h = rng.random_range(1..6) as f64;
            let score = rng.random_range(0..5) as f64 / 4.0;
            let label = rng.random_range(0..2);
            BoundingBox::new(x1, y1, x1 + w, y1 + h, score, label).unwrap()
        })
        .collect()
}
