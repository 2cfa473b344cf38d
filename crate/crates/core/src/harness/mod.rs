//! Desk-scale box regression experiments: a single predicted box is driven
//! toward a target by gradient descent on one of several losses, so the loss
//! geometry can be compared without a detector around it.

mod fig1;
mod fit;
mod losses;
pub mod report;
mod scenarios;
mod sweep;

pub use fig1::{fig1_pairs, Fig1Triple};
pub use fit::{fit, FitConfig, FitRecord, FitStatus, FitTrace, Optimizer};
pub use losses::{giou_horizontal, l1, l2, smooth_l1, LossKind, LossSpec};
pub use scenarios::{aspect_suite, find_scenario, horizontal, standard_suite, Scenario};
pub use sweep::{compare_losses, k_sweep, ExperimentReport};

/// Exact IoU at which a fit stops early.
pub const CONVERGED_IOU: f64 = 0.99;

/// Exact IoU used for the "steps to reach" statistic.
pub const REACH_IOU: f64 = 0.9;
