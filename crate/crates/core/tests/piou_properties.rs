use std::f64::consts::PI;

use piou::corpus::{fuzz_pairs, min_dimension, PairConfig};
use piou::exact::intersection_area;
use piou::gradcheck::{numeric_gradient, relative_errors};
use piou::harness::smooth_l1;
use piou::{
    exact_iou, hard_overlap, piou_loss_pairs, soft_overlap, soft_overlap_horizontal, KernelConfig, Obb, UnionMode,
};
use proptest::prelude::*;

fn obb(cx: f64, cy: f64, w: f64, h: f64, t: f64) -> Obb {
    Obb::new(cx, cy, w, h, t).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn small_box() -> impl Strategy<Value = Obb> {
    (-20.0..20.0f64, -20.0..20.0f64, 2.0..30.0f64, 2.0..30.0f64, 0.0..PI)
        .prop_map(|(cx, cy, w, h, t)| Obb::new(cx, cy, w, h, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn piou_is_in_unit_interval(a in small_box(), b in small_box(), k in 1.0..40.0f64) {
        let o = soft_overlap(&a, &b, &KernelConfig::with_k(k), false).unwrap();
        prop_assert!(o.ln_piou.is_finite());
        prop_assert!(o.piou() <= 1.0 + 1e-6);
        prop_assert!(o.ln_piou <= 1e-6);
    }

    #[test]
    fn integer_translation_is_invisible(a in small_box(), b in small_box(), dx in -40i32..40, dy in -40i32..40) {
        let cfg = KernelConfig::default();
        let base = soft_overlap(&a, &b, &cfg, false).unwrap().piou();
        let moved = soft_overlap(&a.translated(dx as f64, dy as f64), &b.translated(dx as f64, dy as f64), &cfg, false)
            .unwrap()
            .piou();
        prop_assert!((base - moved).abs() <= 1e-3);
    }

    #[test]
    fn horizontal_path_agrees(
        a in (-20.0..20.0f64, -20.0..20.0f64, 2.0..40.0f64, 2.0..40.0f64),
        b in (-20.0..20.0f64, -20.0..20.0f64, 2.0..40.0f64, 2.0..40.0f64),
        hard in any::<bool>(),
    ) {
        let a = obb(a.0, a.1, a.2, a.3, 0.0);
        let b = obb(b.0, b.1, b.2, b.3, 0.0);
        let mut cfg = KernelConfig::default();
        if hard {
            cfg = cfg.hard_union();
        }
        let Ok(grid) = soft_overlap(&a, &b, &cfg, true) else { return Ok(()) };
        let fast = soft_overlap_horizontal(&a, &b, &cfg, true).unwrap();
        prop_assert!((grid.ln_piou - fast.ln_piou).abs() <= 1e-9, "{} {}", grid.ln_piou, fast.ln_piou);
        prop_assert!((grid.piou() - fast.piou()).abs() <= 1e-9);
        for (x, y) in grid.grad_ln.unwrap().iter().zip(fast.grad_ln.unwrap()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} {y}");
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let a = obb(3.3, -2.1, 70.0, 9.0, 0.4);
    let b = obb(0.0, 0.0, 60.0, 12.0, 0.7);
    let cfg = KernelConfig::default();
    let many = soft_overlap(&a, &b, &cfg, true).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| soft_overlap(&a, &b, &cfg, true).unwrap());
    assert_eq!(many, one);
    let pairs = vec![(a, b), (b, a)];
    let l1 = piou_loss_pairs(&pairs, &cfg, true).unwrap();
    let l2 = pool.install(|| piou_loss_pairs(&pairs, &cfg, true).unwrap());
    assert_eq!(l1, l2);
}

#[test]
fn rotation_error_orders_like_exact_iou() {
    let gt = obb(0.0, 0.0, 100.0, 5.0, 0.0);
    let cfg = KernelConfig::default();
    let mut prev: Option<(f64, f64, f64, f64)> = None;
    for deg in [0.0f64, 5.0, 10.0, 20.0] {
        let pred = obb(0.0, 0.0, 100.0, 5.0, deg.to_radians());
        let o = soft_overlap(&pred, &gt, &cfg, false).unwrap();
        let loss = piou_loss_pairs(&[(pred, gt)], &cfg, false).unwrap().value;
        let iou = exact_iou(&pred, &gt);
        let sl1 = smooth_l1(&pred, &gt, &[1.0; 5]);
        if let Some((p, l, i, s)) = prev {
            assert!(o.piou() < p);
            assert!(loss > l);
            assert!(iou < i);
            assert!(sl1 > s);
        }
        prev = Some((o.piou(), loss, iou, sl1));
    }
}

#[test]
fn loss_examples() {
    let b = obb(0.0, 0.0, 20.0, 10.0, 0.0);
    let cfg = KernelConfig::default();
    let self_loss = piou_loss_pairs(&[(b, b)], &cfg, false).unwrap();
    // identical boxes still leave soft mass on both sides of every edge
    assert!(self_loss.value > 0.0 && self_loss.value < 0.25);
    let empty = piou_loss_pairs(&[], &cfg, true).unwrap();
    assert_eq!((empty.value, empty.pair_count), (0.0, 0));
}

#[test]
fn soft_and_hard_union_are_close_on_overlaps() {
    let cfg = PairConfig {
        dim_range: (10.0, 80.0),
        ..PairConfig::default()
    };
    let soft = KernelConfig::default();
    let hard = soft.hard_union();
    let diffs: Vec<f64> = fuzz_pairs(150, &cfg, 5)
        .into_iter()
        .filter(|(a, b)| intersection_area(a, b) > 0.0)
        .map(|(a, b)| {
            let s = soft_overlap(&a, &b, &soft, false).unwrap().piou();
            let h = soft_overlap(&a, &b, &hard, false).unwrap().piou();
            (s - h).abs()
        })
        .collect();
    assert!(diffs.len() > 50);
    assert!(median(diffs) <= 0.05);
}

#[test]
fn sharper_kernels_approach_pixel_counts() {
    let cfg = PairConfig {
        dim_range: (20.0, 120.0),
        ..PairConfig::default()
    };
    let pairs: Vec<_> = fuzz_pairs(120, &cfg, 8)
        .into_iter()
        .filter(|(a, b)| min_dimension(a, b) >= 20.0 && intersection_area(a, b) >= 25.0)
        .collect();
    let mut prev = f64::INFINITY;
    for k in [5.0, 10.0, 15.0, 30.0] {
        let kc = KernelConfig::with_k(k);
        let m = median(
            pairs
                .iter()
                .map(|(a, b)| {
                    (soft_overlap(a, b, &kc, false).unwrap().piou() - hard_overlap(a, b, 1).unwrap().iou).abs()
                })
                .collect(),
        );
        assert!(m <= prev, "k={k}: {m} > {prev}");
        prev = m;
    }
}

/// Richardson extrapolation removes the leading truncation term of the
/// central difference, so it should agree with the analytic gradient far
/// more tightly than the plain difference does.
#[test]
fn analytic_gradient_matches_extrapolated_differences() {
    let cases = [
        (obb(0.37, -0.21, 30.0, 8.0, 0.3), obb(2.0, 1.0, 28.0, 10.0, 0.5), UnionMode::Soft),
        (obb(0.37, -0.21, 30.0, 8.0, 0.3), obb(2.0, 1.0, 28.0, 10.0, 0.5), UnionMode::Hard),
        (obb(40.13, 3.71, 12.0, 6.0, 1.1), obb(0.0, 0.0, 14.0, 9.0, 0.2), UnionMode::Soft),
    ];
    for (pred, gt, union_mode) in cases {
        let cfg = KernelConfig {
            union_mode,
            ..KernelConfig::default()
        };
        let analytic = soft_overlap(&pred, &gt, &cfg, true).unwrap().grad_ln.unwrap();
        let f = |p: [f64; 5]| soft_overlap(&Obb::from_params(p).unwrap(), &gt, &cfg, false).unwrap().ln_piou;
        let mut rich = [0.0; 5];
        for n in 0..5 {
            let d = |h: f64| {
                let (mut hi, mut lo) = (pred.params(), pred.params());
                hi[n] += h;
                lo[n] -= h;
                (f(hi) - f(lo)) / (2.0 * h)
            };
            let h = if n == 4 { 1e-4 } else { 1e-3 };
            rich[n] = (4.0 * d(h / 2.0) - d(h)) / 3.0;
        }
        let err = relative_errors(&analytic, &rich);
        assert!(err.iter().all(|e| *e < 1e-6), "{err:?}");
        let plain = relative_errors(&analytic, &numeric_gradient(&pred, &gt, &cfg).unwrap());
        assert!(plain.iter().all(|e| *e < 1e-4), "{plain:?}");
    }
}

#[test]
fn disjoint_boxes_keep_a_useful_gradient() {
    let gt = obb(0.0, 0.0, 10.0, 10.0, 0.0);
    let pred = obb(60.0, 0.0, 10.0, 10.0, 0.0);
    let o = soft_overlap(&pred, &gt, &KernelConfig::default(), true).unwrap();
    assert!(o.piou() < 1e-100, "{}", o.piou());
    assert!(o.ln_piou.is_finite());
    let g = o.grad_ln.unwrap();
    // ln PIoU rises toward the ground truth
    assert!(g[0] < 0.0, "{g:?}");
}
