//! Box pairs that SmoothL1 cannot tell apart but IoU and PIoU can.

use piou::harness::fig1_pairs;
use piou::KernelConfig;

fn main() -> piou::Result<()> {
    let triples = fig1_pairs(&KernelConfig::default())?;
    println!("{:<10} {:>6} {:>9} {:>7} {:>7} {:>8} {:>8}", "comp", "angle", "smoothl1", "iou_a", "iou_b", "piou_a", "piou_b");
    for t in triples.iter().step_by(9) {
        println!(
            "{:<10} {:>6.1} {:>9.5} {:>7.4} {:>7.4} {:>8.4} {:>8.4}",
            t.compensation,
            t.pred_a.theta().to_degrees(),
            t.smooth_l1_a,
            t.iou_a,
            t.iou_b,
            t.piou_loss_a,
            t.piou_loss_b
        );
    }
    let agree = triples
        .iter()
        .filter(|t| (t.iou_a > t.iou_b) == (t.piou_loss_a < t.piou_loss_b))
        .count();
    println!("PIoU loss orders {agree} of {} pairs like exact IoU", triples.len());
    Ok(())
}
