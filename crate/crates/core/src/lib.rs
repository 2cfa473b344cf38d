//! Overlap measures for oriented bounding boxes.
//!
//! * [`exact`]: exact IoU by convex polygon clipping.
//! * [`pixel`]: hard IoU by counting lattice samples, optionally supersampled.
//! * [`piou`]: the differentiable PIoU measure and `-ln PIoU` loss with
//!   analytic gradients.
//!
//! Around these sit anchor matching, a small regression harness for comparing
//! losses, quadrilateral annotation I/O, and a finite-difference gradient
//! checker.
//!
//! ```
//! use piou::{exact_iou, soft_overlap, KernelConfig, Obb};
//!
//! let a = Obb::from_degrees(0.0, 0.0, 40.0, 10.0, 0.0)?;
//! let b = Obb::from_degrees(2.0, 1.0, 40.0, 10.0, 10.0)?;
//! let iou = exact_iou(&a, &b);
//! let soft = soft_overlap(&a, &b, &KernelConfig::default(), true)?;
//! assert!((soft.piou() - iou).abs() < 0.1);
//! # Ok::<(), piou::Error>(())
//! ```

pub mod annot;
pub mod cli;
pub mod corpus;
mod error;
pub mod exact;
pub mod gradcheck;
pub mod harness;
pub mod matching;
pub mod obb;
pub mod piou;
pub mod pixel;

pub use error::{Error, Result};
pub use exact::{exact_iou, intersection_area, ConvexPolygon};
pub use matching::{match_anchors, rotate_anchors, IouBackend, MatchSet, MatchedPair};
pub use obb::{contains, relative_position, Hbb, Obb, PixelPoint, RelativePosition};
pub use piou::{
    piou_loss, piou_loss_pairs, soft_overlap, soft_overlap_horizontal, Grad5, HalfExtentMode, KernelConfig, PiouLoss,
    SoftOverlap, UnionMode,
};
pub use pixel::{hard_overlap, HardOverlap};
