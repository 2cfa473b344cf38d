use std::f64::consts::PI;

use piou::corpus::{fuzz_pairs, PairConfig};
use piou::{exact_iou, match_anchors, piou_loss, rotate_anchors, IouBackend, KernelConfig, Obb};

#[test]
fn rotated_anchor_set_is_anchor_major() {
    let base = [Obb::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap(), Obb::new(5.0, 5.0, 8.0, 8.0, 0.0).unwrap()];
    let out = rotate_anchors(&base).unwrap();
    assert_eq!(out.len(), 12);
    for (n, a) in out.iter().enumerate() {
        assert_eq!(a.cx(), base[n / 6].cx());
        assert!((a.theta() - (n % 6) as f64 * PI / 6.0).abs() < 1e-12);
    }
    assert!(rotate_anchors(&[]).unwrap().is_empty());
}

#[test]
fn raising_the_threshold_never_adds_pairs() {
    let cfg = PairConfig {
        dim_range: (8.0, 60.0),
        ..PairConfig::default()
    };
    let pairs = fuzz_pairs(40, &cfg, 2);
    let anchors: Vec<Obb> = pairs.iter().map(|p| p.0).collect();
    let gts: Vec<Obb> = pairs.iter().map(|p| p.1).collect();
    let mut prev = usize::MAX;
    for t in [0.05, 0.2, 0.35, 0.5, 0.7, 0.9] {
        let m = match_anchors(&anchors, &gts, IouBackend::Exact, t).unwrap();
        assert!(m.len() <= anchors.len());
        assert!(m.len() <= prev);
        for p in m.pairs() {
            assert!(p.iou > t);
        }
        prev = m.len();
    }
}

#[test]
fn exact_and_pixel_backends_agree_away_from_threshold() {
    let cfg = PairConfig {
        dim_range: (10.0, 80.0),
        ..PairConfig::default()
    };
    let threshold = 0.5;
    let mut compared = 0;
    for (n, (a, g)) in fuzz_pairs(200, &cfg, 17).into_iter().enumerate() {
        let gts = [g];
        if (exact_iou(&a, &g) - threshold).abs() < 0.02 {
            continue;
        }
        let exact = match_anchors(&[a], &gts, IouBackend::Exact, threshold).unwrap();
        let pixel = match_anchors(&[a], &gts, IouBackend::Pixel { supersample: 16 }, threshold).unwrap();
        assert_eq!(exact.len(), pixel.len(), "pair {n}");
        compared += 1;
    }
    assert!(compared > 150);
}

#[test]
fn matched_set_feeds_the_loss() {
    let gt = Obb::new(0.0, 0.0, 40.0, 8.0, 0.3).unwrap();
    let anchors = [
        Obb::new(1.0, 0.5, 40.0, 8.0, 0.3).unwrap(),
        Obb::new(60.0, 0.0, 40.0, 8.0, 0.3).unwrap(),
    ];
    let m = match_anchors(&anchors, &[gt], IouBackend::Piou(KernelConfig::default()), 0.5).unwrap();
    assert_eq!(m.len(), 1);
    let loss = piou_loss(&m, &KernelConfig::default(), true).unwrap();
    assert_eq!(loss.pair_count, 1);
    assert_eq!(loss.grads.len(), 1);
    assert!(loss.value > 0.0);
}
