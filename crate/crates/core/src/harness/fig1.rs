//! Box triples on which SmoothL1 cannot tell two predictions apart but IoU
//! can.
//!
//! `pred_a` rotates the ground truth by `Δθ`. `pred_b` instead moves one
//! other parameter by the same numeric amount, which gives the identical
//! SmoothL1 value (both residuals sit in the quadratic branch). The overlap
//! of the two predictions with the ground truth is very different on
//! elongated boxes.

use super::losses::smooth_l1;
use crate::error::Result;
use crate::exact::exact_iou;
use crate::obb::Obb;
use crate::piou::{soft_overlap, KernelConfig};

/// Minimum exact-IoU gap for a triple to be emitted.
pub const MIN_IOU_GAP: f64 = 0.05;

/// Tolerance on SmoothL1 equality.
pub const SMOOTH_L1_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Triple {
    pub gt: Obb,
    pub pred_a: Obb,
    pub pred_b: Obb,
    /// Which parameter of `pred_b` carries the compensating residual.
    pub compensation: &'static str,
    pub smooth_l1_a: f64,
    pub smooth_l1_b: f64,
    pub iou_a: f64,
    pub iou_b: f64,
    pub piou_loss_a: f64,
    pub piou_loss_b: f64,
}

const GTS: [(f64, f64); 4] = [(60.0, 4.0), (80.0, 4.0), (100.0, 5.0), (40.0, 4.0)];
const ANGLES_DEG: [f64; 9] = [4.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0];
const COMPENSATIONS: [&str; 5] = ["cx", "cy", "w", "h", "theta_neg"];

/// Candidate triples before filtering, including the symmetric `-Δθ`
/// control which has equal IoU by construction.
fn candidates() -> Vec<(Obb, Obb, Obb, &'static str)> {
    let mut out = Vec::new();
    for (w, h) in GTS {
        let gt = Obb::new(0.0, 0.0, w, h, 0.0).expect("valid");
        for deg in ANGLES_DEG {
            let d = deg.to_radians();
            let pred_a = Obb::new(0.0, 0.0, w, h, d).expect("valid");
            for comp in COMPENSATIONS {
                let pred_b = match comp {
                    "cx" => Obb::new(d, 0.0, w, h, 0.0),
                    "cy" => Obb::new(0.0, d, w, h, 0.0),
                    "w" => Obb::new(0.0, 0.0, w + d, h, 0.0),
                    "h" => Obb::new(0.0, 0.0, w, h + d, 0.0),
                    _ => Obb::new(0.0, 0.0, w, h, -d),
                }
                .expect("valid");
                out.push((gt, pred_a, pred_b, comp));
            }
        }
    }
    out
}

/// Certified triples: equal SmoothL1 to [`SMOOTH_L1_TOL`] and exact IoU gap
/// of at least [`MIN_IOU_GAP`]. PIoU losses are reported with `kernel`.
pub fn fig1_pairs(kernel: &KernelConfig) -> Result<Vec<Fig1Triple>> {
    let weights = [1.0; 5];
    let mut out = Vec::new();
    for (gt, pred_a, pred_b, compensation) in candidates() {
        let smooth_l1_a = smooth_l1(&pred_a, &gt, &weights);
        let smooth_l1_b = smooth_l1(&pred_b, &gt, &weights);
        let iou_a = exact_iou(&pred_a, &gt);
        let iou_b = exact_iou(&pred_b, &gt);
        if (smooth_l1_a - smooth_l1_b).abs() > SMOOTH_L1_TOL || (iou_a - iou_b).abs() < MIN_IOU_GAP {
            continue;
        }
        let piou_loss_a = -soft_overlap(&pred_a, &gt, kernel, false)?.ln_piou;
        let piou_loss_b = -soft_overlap(&pred_b, &gt, kernel, false)?.ln_piou;
        out.push(Fig1Triple {
            gt,
            pred_a,
            pred_b,
            compensation,
            smooth_l1_a,
            smooth_l1_b,
            iou_a,
            iou_b,
            piou_loss_a,
            piou_loss_b,
        });
    }
    Ok(out)
}
