//! Rotated anchors, IoU matching and the batch PIoU loss.

use piou::{match_anchors, piou_loss, rotate_anchors, IouBackend, KernelConfig, Obb};

fn main() -> piou::Result<()> {
    let mut base = Vec::new();
    for gy in 0..4 {
        for gx in 0..4 {
            base.push(Obb::new(16.0 + 32.0 * gx as f64, 16.0 + 32.0 * gy as f64, 48.0, 12.0, 0.0)?);
        }
    }
    let anchors = rotate_anchors(&base)?;
    let gts = [
        Obb::from_degrees(50.0, 44.0, 52.0, 10.0, 35.0)?,
        Obb::from_degrees(113.0, 81.0, 44.0, 14.0, 122.0)?,
    ];
    let kernel = KernelConfig::default();
    for (name, backend) in [
        ("exact", IouBackend::Exact),
        ("pixel", IouBackend::Pixel { supersample: 4 }),
        ("piou", IouBackend::Piou(kernel)),
    ] {
        let m = match_anchors(&anchors, &gts, backend, 0.5)?;
        let loss = piou_loss(&m, &kernel, true)?;
        println!("{name:<6} {} positives of {} anchors, mean PIoU loss {:.4}", m.len(), anchors.len(), loss.value);
        for p in m.pairs() {
            println!("    anchor {:>3} -> gt {} iou {:.3}", p.anchor_index, p.gt_index, p.iou);
        }
    }
    Ok(())
}
