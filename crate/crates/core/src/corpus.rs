//! Seeded random box pairs for oracle comparisons and benchmarks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::obb::Obb;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    /// Box sides are uniform in this range, pixels.
    pub dim_range: (f64, f64),
    /// Share of pairs whose second center is placed near the first.
    pub overlap_fraction: f64,
    /// Centers are uniform in `[-extent, extent]²`.
    pub extent: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            dim_range: (4.0, 200.0),
            overlap_fraction: 0.8,
            extent: 50.0,
        }
    }
}

fn random_box(rng: &mut ChaCha8Rng, cfg: &PairConfig, cx: f64, cy: f64) -> Obb {
    let (lo, hi) = cfg.dim_range;
    let w = rng.random_range(lo..=hi);
    let h = rng.random_range(lo..=hi);
    let theta = rng.random_range(0.0..PI);
    Obb::new(cx, cy, w, h, theta).expect("sampled box is valid")
}

/// `n` box pairs with all orientations. Most pairs are placed so that the
/// boxes are likely to overlap; the rest are anywhere in the region.
pub fn fuzz_pairs(n: usize, cfg: &PairConfig, seed: u64) -> Vec<(Obb, Obb)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = cfg.extent;
    (0..n)
        .map(|_| {
            let (ax, ay) = (rng.random_range(-e..=e), rng.random_range(-e..=e));
            let a = random_box(&mut rng, cfg, ax, ay);
            let (cx, cy) = if rng.random_bool(cfg.overlap_fraction) {
                let r = 0.5 * a.w().min(a.h());
                (a.cx() + rng.random_range(-r..=r), a.cy() + rng.random_range(-r..=r))
            } else {
                (rng.random_range(-e..=e), rng.random_range(-e..=e))
            };
            let b = random_box(&mut rng, cfg, cx, cy);
            (a, b)
        })
        .collect()
}

/// Smallest side over both boxes.
pub fn min_dimension(a: &Obb, b: &Obb) -> f64 {
    a.w().min(a.h()).min(b.w()).min(b.h())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_in_range() {
        let cfg = PairConfig::default();
        let a = fuzz_pairs(50, &cfg, 3);
        assert_eq!(a, fuzz_pairs(50, &cfg, 3));
        assert_ne!(a, fuzz_pairs(50, &cfg, 4));
        for (p, q) in &a {
            assert!(min_dimension(p, q) >= 4.0);
            assert!(p.w().max(q.h()) <= 200.0);
        }
        assert!(fuzz_pairs(0, &cfg, 1).is_empty());
    }
}
