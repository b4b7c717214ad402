mod common;

use asd::detection::{nms, BoundingBox};
use common::{exhaustive_nms, random_boxes};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn boxes() -> impl Strategy<Value = Vec<BoundingBox>> {
    any::<u64>().prop_map(|seed| random_boxes(&mut ChaCha8Rng::seed_from_u64(seed), 6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn greedy_matches_exhaustive(set in boxes(), thr in prop::sample::select(vec![0.1, 0.25, 0.4, 0.5, 0.7])) {
        prop_assert_eq!(nms(&set, thr), exhaustive_nms(&set, thr));
    }

    #[test]
    fn nms_is_idempotent(set in boxes(), thr in 0.05f64..0.95) {
        let once = nms(&set, thr);
        prop_assert_eq!(nms(&once, thr), once);
    }

    #[test]
    fn input_order_does_not_matter(set in boxes(), thr in 0.05f64..0.95, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = set.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(nms(&shuffled, thr), nms(&set, thr));
    }

    #[test]
    fn survivors_of_one_label_do_not_overlap(set in boxes(), thr in 0.05f64..0.95) {
        let kept = nms(&set, thr);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(a.label != b.label || common::reference_iou(a, b) < thr);
            }
        }
    }
}
