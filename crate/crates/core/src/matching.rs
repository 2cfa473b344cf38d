//! Rotated anchor generation and positive-pair matching.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::exact_iou;
use crate::obb::Obb;
use crate::pixel::hard_overlap;
use crate::piou::{soft_overlap, KernelConfig};

/// Number of orientations each horizontal anchor is expanded into.
pub const ANCHOR_ROTATIONS: usize = 6;

/// Default matching threshold; a pair must exceed it strictly.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.5;

/// Expands each horizontal anchor into copies rotated by `kπ/6`,
/// `k = 0..6`, anchor-major.
pub fn rotate_anchors(base: &[Obb]) -> Result<Vec<Obb>> {
    let mut out = Vec::with_capacity(base.len() * ANCHOR_ROTATIONS);
    for a in base {
        if a.theta() != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "base anchors must be horizontal, got theta = {}",
                a.theta()
            )));
        }
        for k in 0..ANCHOR_ROTATIONS {
            out.push(Obb::new(a.cx(), a.cy(), a.w(), a.h(), k as f64 * PI / 6.0)?);
        }
    }
    Ok(out)
}

/// Which overlap measure decides a match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IouBackend {
    Exact,
    Pixel { supersample: u32 },
    Piou(KernelConfig),
}

impl Default for IouBackend {
    fn default() -> Self {
        IouBackend::Exact
    }
}

impl IouBackend {
    pub fn iou(&self, a: &Obb, b: &Obb) -> Result<f64> {
        match self {
            IouBackend::Exact => Ok(exact_iou(a, b)),
            IouBackend::Pixel { supersample } => Ok(hard_overlap(a, b, *supersample)?.iou),
            IouBackend::Piou(cfg) => Ok(soft_overlap(a, b, cfg, false)?.piou()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub anchor_index: usize,
    pub gt_index: usize,
    pub pred: Obb,
    pub gt: Obb,
    pub iou: f64,
}

/// Positive `(pred, gt)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchSet {
    pairs: Vec<MatchedPair>,
}

impl MatchSet {
    /// Wraps pairs that are positive by construction, e.g. predictions
    /// decoded from already-matched anchors.
    pub fn from_pairs(pairs: Vec<MatchedPair>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[MatchedPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn box_pairs(&self) -> Vec<(Obb, Obb)> {
        self.pairs.iter().map(|p| (p.pred, p.gt)).collect()
    }
}

/// Matches every anchor to its best ground truth if that IoU strictly
/// exceeds `threshold`. Ties go to the lowest ground-truth index.
pub fn match_anchors(anchors: &[Obb], gts: &[Obb], backend: IouBackend, threshold: f64) -> Result<MatchSet> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must be in (0, 1), got {threshold}")));
    }
    let best: Vec<Option<MatchedPair>> = anchors
        .par_iter()
        .enumerate()
        .map(|(ai, a)| {
            let mut best: Option<(usize, f64)> = None;
            for (gi, g) in gts.iter().enumerate() {
                let iou = backend.iou(a, g)?;
                if best.map_or(true, |(_, b)| iou > b) {
                    best = Some((gi, iou));
                }
            }
            Ok(best.filter(|&(_, iou)| iou > threshold).map(|(gi, iou)| MatchedPair {
                anchor_index: ai,
                gt_index: gi,
                pred: *a,
                gt: gts[gi],
                iou,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(MatchSet {
        pairs: best.into_iter().flatten().collect(),
    })
}
