//! Three ways to measure the overlap of two rotated boxes.
//!
//! `cargo run --example iou_backends`

use piou::{exact_iou, hard_overlap, soft_overlap, KernelConfig, Obb};

fn main() -> piou::Result<()> {
    let gt = Obb::from_degrees(50.0, 40.0, 80.0, 8.0, 12.0)?;
    let kernel = KernelConfig::default();
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "angle", "exact", "pixel1", "pixel16", "piou");
    for deg in [12.0, 15.0, 20.0, 30.0, 60.0, 102.0] {
        let pred = Obb::from_degrees(52.0, 41.0, 80.0, 8.0, deg)?;
        println!(
            "{deg:>6.1} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            exact_iou(&pred, &gt),
            hard_overlap(&pred, &gt, 1)?.iou,
            hard_overlap(&pred, &gt, 16)?.iou,
            soft_overlap(&pred, &gt, &kernel, false)?.piou(),
        );
    }
    Ok(())
}
