//! How kernel sharpness trades smoothness for fidelity to the pixel count.

use piou::corpus::{fuzz_pairs, min_dimension, PairConfig};
use piou::harness::{aspect_suite, k_sweep, FitConfig, LossKind, LossSpec};
use piou::{hard_overlap, soft_overlap, KernelConfig};

fn main() -> piou::Result<()> {
    let pairs: Vec<_> = fuzz_pairs(200, &PairConfig::default(), 1)
        .into_iter()
        .filter(|(a, b)| min_dimension(a, b) >= 20.0)
        .collect();
    let ks = [5.0, 10.0, 15.0, 30.0];
    for k in ks {
        let cfg = KernelConfig::with_k(k);
        let mut err = 0.0;
        for (a, b) in &pairs {
            err += (soft_overlap(a, b, &cfg, false)?.piou() - hard_overlap(a, b, 1)?.iou).abs();
        }
        println!("k={k:<4} mean |piou - pixel iou| = {:.2e} over {} pairs", err / pairs.len() as f64, pairs.len());
    }

    let suite: Vec<_> = aspect_suite(10.0).into_iter().filter(|s| s.id.ends_with("-a")).collect();
    let reports = k_sweep(&suite, &ks, &LossSpec::new(LossKind::Piou), &FitConfig::default())?;
    for r in &reports {
        println!(
            "{:<18} k={:<4} final iou {:.4} steps to 0.9 {:?}",
            r.scenario,
            r.k.unwrap_or(f64::NAN),
            r.final_iou,
            r.steps_to_reach
        );
    }
    Ok(())
}
