//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use asd::analysis::{spectral_stats, surrogates, verify_amplitude_bound};
use asd::detection::{nms, AsdConfig, Detector};
use asd::harness::cli::bench;
use asd::harness::corpus::{generate, manifests, CorpusImage, CorpusSpec, PatchTemplate};
use asd::harness::eval::GroundTruth;
use asd::harness::evaluate;
use asd::harness::oracle::{EvasionRule, OracleDetector};
use asd::harness::patch::{inject_patch, PatchKind, PatchSpec};
use asd::spectral_mask::{asd_mask, level_threshold, MaskConfig, RgbImage};
use asd::wavelet::{decompose, dwt_step_2d, reconstruct, GrayImage};
use asd::BoundingBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, fail: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(fail.into())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Outcome {
    check(
        elapsed < limit,
        String::new(),
        format!("{what} took {:.2}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()),
    )
}

fn reconstruction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=5usize);
        let m = 1usize << n;
        let side = |rng: &mut ChaCha8Rng| m * rng.random_range(8usize.div_ceil(m)..=64 / m);
        let (h, w) = (side(&mut rng), side(&mut rng));
        let img = GrayImage::from_fn(h, w, |_, _| rng.random_range(0.0..=1.0));
        let back = reconstruct(&decompose(&img, n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-10, "", format!("max error {worst:e}"))?;
    within(elapsed, Duration::from_secs(10), "1000 round trips")?;
    Ok(format!("max error {worst:.1e} in {:.2}s", elapsed.as_secs_f64()))
}

fn amplitude_bound() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for eps in [8.0 / 255.0, 0.1, 0.5] {
        let mut max_d = 0.0f64;
        let mut max_a = 0.0f64;
        for bits in 0u8..16 {
            let px = [0, 1, 2, 3].map(|k| if bits >> k & 1 == 1 { eps } else { -eps });
            let (a, d) = dwt_step_2d(&GrayImage::new(2, 2, px.to_vec()).unwrap()).unwrap();
            max_a = max_a.max(a.get(0, 0).abs());
            for band in d.bands() {
                max_d = max_d.max(band.get(0, 0).abs());
            }
        }
        check(
            (max_d - 2.0 * eps).abs() <= 1e-12 && (max_a - 2.0 * eps).abs() <= 1e-12,
            "",
            format!("eps {eps}: extremal |D| {max_d}, |A| {max_a}, expected {}", 2.0 * eps),
        )?;
        let report = verify_amplitude_bound(eps, 3, 100_000, (32, 32), 0x5eed).map_err(|e| e.to_string())?;
        check(
            !report.violated && (report.extremal_max_detail - 2.0 * eps).abs() <= 1e-12,
            "",
            format!("eps {eps}: violated={} ratio {}", report.violated, report.max_observed_ratio),
        )?;
        notes.push(format!("{:.4}", report.max_observed_ratio));
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60), "bound search")?;
    Ok(format!(
        "extremal blocks hit 2eps; 0 violations in 3x10^5 trials (max {}) in {:.1}s",
        notes.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn constant_signal() -> Outcome {
    for c in [0.0, 0.25, 0.5, 0.7, 1.0, 0.123456789] {
        for n in 1..=4 {
            let img = GrayImage::filled(32, 48, c);
            let pyr = decompose(&img, n).unwrap();
            check(pyr.levels.iter().all(|t| t.is_zero()), "", format!("c={c}, n={n}: nonzero detail"))?;
            let (a1, _) = dwt_step_2d(&img).unwrap();
            check(a1.pixels().iter().all(|&v| v == 2.0 * c), "", format!("c={c}: A_1 != 2c"))?;
        }
    }
    Ok("details identically zero, A_1 = 2c".into())
}

fn threshold_schedule() -> Outcome {
    let got = [1, 2, 3].map(|i| level_threshold(0.17, i));
    check(got == [0.17, 0.34, 0.68], format!("{got:?}"), format!("got {got:?}"))
}

fn range_evasion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut total = 0usize;
    for _ in 0..100 {
        let (h, w) = (rng.random_range(8..=96), rng.random_range(8..=96));
        let lo = rng.random_range(0.0..=0.83);
        let img = RgbImage::from_fn(h, w, |_, _| [0; 3].map(|_| lo + 0.17 * rng.random_range(0.0..=1.0)));
        for n in 1..=3 {
            let (_, mask) = asd_mask(&img, &MaskConfig { n, ..MaskConfig::default() }).map_err(|e| e.to_string())?;
            total += mask.count();
        }
    }
    check(total == 0, "0 mask pixels over 100 images x 3 levels", format!("{total} mask pixels"))
}

fn checkerboard() -> Outcome {
    let region = BoundingBox::new(16.0, 16.0, 48.0, 48.0, 1.0, 0).unwrap();
    let spec = PatchSpec { period: 2, ..PatchSpec::new(PatchKind::Checkerboard, region, 1.0) };
    let img = inject_patch(&RgbImage::filled(64, 64, 0.5), &spec, 0).unwrap();
    let (_, mask) = asd_mask(&img, &MaskConfig::default()).map_err(|e| e.to_string())?;
    let inside = mask.count_in(16, 48, 16, 48) as f64 / (32.0 * 32.0);
    // one level-1 coefficient = 2 px
    let near = mask.count_in(14, 50, 14, 50);
    let outside = mask.count() - near;
    check(
        inside >= 0.9 && outside == 0,
        format!("{:.1}% of patch masked, 0 pixels outside the 2 px border", inside * 100.0),
        format!("{:.1}% of patch masked, {outside} pixels outside the border", inside * 100.0),
    )
}

fn nms_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10_000 {
        let boxes = common::random_boxes(&mut rng, 6);
        let thr = [0.1, 0.3, 0.4, 0.5, 0.7][trial % 5];
        let greedy = nms(&boxes, thr);
        if greedy != common::exhaustive_nms(&boxes, thr) {
            return Err(format!("mismatch on trial {trial}: {boxes:?}"));
        }
        if nms(&greedy, thr) != greedy {
            return Err(format!("not idempotent on trial {trial}"));
        }
    }
    Ok("10^4 instances match the exhaustive reference; idempotent".into())
}

fn spectral_ordering() -> Outcome {
    let adv = spectral_stats(&surrogates::adversarial_set(16, 64, 21), 3).map_err(|e| e.to_string())?;
    let ben = spectral_stats(&surrogates::benign_set(16, 64, 2.0, 21), 3).map_err(|e| e.to_string())?;
    let ordered = adv.per_level_mean.iter().zip(&ben.per_level_mean).all(|(a, b)| a > b);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    check(
        ordered && adv.per_level_mean.len() == 3,
        format!("noise {} > low-pass {}", fmt(&adv.per_level_mean), fmt(&ben.per_level_mean)),
        format!("noise {} vs low-pass {}", fmt(&adv.per_level_mean), fmt(&ben.per_level_mean)),
    )
}

fn oracle_ap(images: &[CorpusImage], levels: Vec<u32>) -> Result<f64, String> {
    let (gt, patches) = manifests(images);
    let gt = GroundTruth::new(gt).map_err(|e| e.to_string())?;
    let named: Vec<(String, RgbImage)> = images.iter().map(|c| (c.name.clone(), c.image.clone())).collect();
    let config = AsdConfig { levels, theta: 0.17, ..AsdConfig::default() };
    let (_, report) = evaluate(&named, &gt, &config, |name, image| {
        let regions = patches[name].iter().map(PatchSpec::pixel_region).collect();
        let oracle = OracleDetector::new(gt.boxes(name), regions, image.clone(), EvasionRule::default())?;
        Ok(Box::new(oracle) as Box<dyn Detector>)
    })
    .map_err(|e| e.to_string())?;
    Ok(report.ap50)
}

fn end_to_end() -> Outcome {
    let spec = |patch| CorpusSpec { count: 50, size: 128, seed: 2024, patch };
    let patched = generate(&spec(Some(PatchTemplate::default()))).map_err(|e| e.to_string())?;
    let clean = generate(&spec(None)).map_err(|e| e.to_string())?;
    let undefended = oracle_ap(&patched, vec![0])?;
    let defended = oracle_ap(&patched, vec![0, 1, 2, 3])?;
    let clean_ap = oracle_ap(&clean, vec![0, 1, 2, 3])?;
    let summary = format!("AP50 undefended {undefended:.3}, defended {defended:.3}, clean {clean_ap:.3}");
    check(undefended <= 0.1 && defended >= 0.9 && clean_ap == 1.0, summary.clone(), summary)
}

fn performance() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let report = pool.install(|| bench(416, 3, 15, 50.0, &AsdConfig::default())).map_err(|e| e.to_string())?;
    let summary = format!("median {:.1} ms (min {:.1} ms), budget 50 ms", report.median_ms, report.min_ms);
    check(report.within_budget, summary.clone(), summary)
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("perfect reconstruction", reconstruction),
        ("amplitude bound", amplitude_bound),
        ("constant-signal rule", constant_signal),
        ("threshold schedule", threshold_schedule),
        ("range-evasion invariant", range_evasion),
        ("checkerboard detection", checkerboard),
        ("NMS oracle equivalence", nms_oracle),
        ("spectral-statistics ordering", spectral_ordering),
        ("end-to-end efficacy", end_to_end),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
