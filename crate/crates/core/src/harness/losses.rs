use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obb::{wrap_half_pi, Obb};
use crate::piou::{soft_overlap, Grad5, KernelConfig, ParamMask, UnionMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Piou,
    Hpiou,
    L1,
    L2,
    SmoothL1,
    GiouHorizontal,
}

impl LossKind {
    pub const ALL: [LossKind; 6] = [
        LossKind::Piou,
        LossKind::Hpiou,
        LossKind::L1,
        LossKind::L2,
        LossKind::SmoothL1,
        LossKind::GiouHorizontal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Piou => "piou",
            LossKind::Hpiou => "hpiou",
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
            LossKind::SmoothL1 => "smooth_l1",
            LossKind::GiouHorizontal => "giou_horizontal",
        }
    }

    pub fn parse(s: &str) -> Option<LossKind> {
        LossKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn uses_kernel(&self) -> bool {
        matches!(self, LossKind::Piou | LossKind::Hpiou)
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A regression loss between a predicted box and its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Used by `piou` and `hpiou`; the union mode is set from `kind`.
    pub kernel: KernelConfig,
    /// Per-parameter weights for the distance losses.
    pub weights: [f64; 5],
    pub mask: ParamMask,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        let mask = if kind == LossKind::GiouHorizontal {
            ParamMask::NO_ANGLE
        } else {
            ParamMask::ALL
        };
        Self {
            kind,
            kernel: KernelConfig::default(),
            weights: [1.0; 5],
            mask,
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.kernel.k = k;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelConfig) -> Self {
        self.kernel = kernel;
        self
    }

    fn kernel_config(&self) -> KernelConfig {
        let mut cfg = self.kernel;
        cfg.union_mode = match self.kind {
            LossKind::Hpiou => UnionMode::Hard,
            _ => UnionMode::Soft,
        };
        cfg
    }

    pub fn validate(&self, init: &Obb, target: &Obb) -> Result<()> {
        if self.kind == LossKind::GiouHorizontal && (init.theta() != 0.0 || target.theta() != 0.0) {
            return Err(Error::InvalidArgument(
                "giou_horizontal needs theta = 0 on both boxes".into(),
            ));
        }
        if self.kind.uses_kernel() {
            self.kernel.validate()?;
        }
        Ok(())
    }

    /// Loss value and, on request, its gradient with respect to the raw
    /// predicted parameters `(cx, cy, w, h, θ)`, masked.
    pub fn evaluate(&self, pred: &Obb, target: &Obb, want_grad: bool) -> Result<(f64, Option<Grad5>)> {
        let (value, grad) = match self.kind {
            LossKind::Piou | LossKind::Hpiou => {
                let o = soft_overlap(pred, target, &self.kernel_config(), want_grad)?;
                (-o.ln_piou, o.grad_ln.map(|g| g.map(|v| -v)))
            }
            LossKind::L1 => {
                let (v, g) = l1(pred, target, &self.weights);
                (v, Some(g))
            }
            LossKind::L2 => {
                let (v, g) = l2(pred, target, &self.weights);
                (v, Some(g))
            }
            LossKind::SmoothL1 => {
                let (v, g) = smooth_l1_with_grad(pred, target, &self.weights);
                (v, Some(g))
            }
            LossKind::GiouHorizontal => {
                let (v, g) = giou_horizontal(pred, target);
                (v, Some(g))
            }
        };
        let grad = if want_grad {
            grad.map(|mut g| {
                self.mask.apply(&mut g);
                g
            })
        } else {
            None
        };
        Ok((value, grad))
    }
}

/// Parameter residuals with the angle wrapped into `(-π/2, π/2]`.
fn residuals(pred: &Obb, gt: &Obb) -> [f64; 5] {
    [
        pred.cx() - gt.cx(),
        pred.cy() - gt.cy(),
        pred.w() - gt.w(),
        pred.h() - gt.h(),
        wrap_half_pi(pred.theta() - gt.theta()),
    ]
}

pub fn l1(pred: &Obb, gt: &Obb, weights: &[f64; 5]) -> (f64, Grad5) {
    let r = residuals(pred, gt);
    let mut g = [0.0; 5];
    let mut v = 0.0;
    for n in 0..5 {
        v += weights[n] * r[n].abs();
        g[n] = weights[n] * r[n].signum() * (r[n] != 0.0) as u8 as f64;
    }
    (v, g)
}

pub fn l2(pred: &Obb, gt: &Obb, weights: &[f64; 5]) -> (f64, Grad5) {
    let r = residuals(pred, gt);
    let mut g = [0.0; 5];
    let mut v = 0.0;
    for n in 0..5 {
        v += weights[n] * r[n] * r[n];
        g[n] = 2.0 * weights[n] * r[n];
    }
    (v, g)
}

/// Weighted SmoothL1 over the five parameter residuals:
/// `0.5 r²` when `|r| < 1`, else `|r| - 0.5`.
pub fn smooth_l1(pred: &Obb, gt: &Obb, weights: &[f64; 5]) -> f64 {
    smooth_l1_with_grad(pred, gt, weights).0
}

fn smooth_l1_with_grad(pred: &Obb, gt: &Obb, weights: &[f64; 5]) -> (f64, Grad5) {
    let r = residuals(pred, gt);
    let mut g = [0.0; 5];
    let mut v = 0.0;
    for n in 0..5 {
        let a = r[n].abs();
        if a < 1.0 {
            v += weights[n] * 0.5 * r[n] * r[n];
            g[n] = weights[n] * r[n];
        } else {
            v += weights[n] * (a - 0.5);
            g[n] = weights[n] * r[n].signum();
        }
    }
    (v, g)
}

/// `1 - GIoU` for axis-aligned boxes, with its gradient in
/// `(cx, cy, w, h)`; the angle entry is zero.
pub fn giou_horizontal(pred: &Obb, gt: &Obb) -> (f64, Grad5) {
    let span = |c: f64, e: f64| (c - 0.5 * e, c + 0.5 * e);
    let (px1, px2) = span(pred.cx(), pred.w());
    let (py1, py2) = span(pred.cy(), pred.h());
    let (gx1, gx2) = span(gt.cx(), gt.w());
    let (gy1, gy2) = span(gt.cy(), gt.h());

    // overlap length along one axis and its derivative w.r.t. (center, extent)
    let overlap = |p1: f64, p2: f64, g1: f64, g2: f64| {
        let len = p2.min(g2) - p1.max(g1);
        if len <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let d_hi = (p2 < g2) as u8 as f64;
        let d_lo = -((p1 > g1) as u8 as f64);
        (len, d_hi + d_lo, 0.5 * (d_hi - d_lo))
    };
    let hull = |p1: f64, p2: f64, g1: f64, g2: f64| {
        let len = p2.max(g2) - p1.min(g1);
        let d_hi = (p2 > g2) as u8 as f64;
        let d_lo = -((p1 < g1) as u8 as f64);
        (len, d_hi + d_lo, 0.5 * (d_hi - d_lo))
    };

    let (iw, diw_c, diw_e) = overlap(px1, px2, gx1, gx2);
    let (ih, dih_c, dih_e) = overlap(py1, py2, gy1, gy2);
    let (cw, dcw_c, dcw_e) = hull(px1, px2, gx1, gx2);
    let (ch, dch_c, dch_e) = hull(py1, py2, gy1, gy2);

    let inter = iw * ih;
    let union = pred.area() + gt.area() - inter;
    let enclose = cw * ch;
    let loss = 2.0 - inter / union - union / enclose;

    let d_inter = [ih * diw_c, iw * dih_c, ih * diw_e, iw * dih_e];
    let d_area = [0.0, 0.0, pred.h(), pred.w()];
    let d_enclose = [ch * dcw_c, cw * dch_c, ch * dcw_e, cw * dch_e];
    let mut g = [0.0; 5];
    for n in 0..4 {
        let d_union = d_area[n] - d_inter[n];
        let d_iou = (d_inter[n] * union - inter * d_union) / (union * union);
        let d_ratio = (d_union * enclose - union * d_enclose[n]) / (enclose * enclose);
        g[n] = -d_iou - d_ratio;
    }
    (loss, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obb(cx: f64, cy: f64, w: f64, h: f64, t: f64) -> Obb {
        Obb::new(cx, cy, w, h, t).unwrap()
    }

    const W: [f64; 5] = [1.0; 5];

    #[test]
    fn smooth_l1_examples() {
        let gt = obb(0.0, 0.0, 10.0, 4.0, 0.3);
        assert_eq!(smooth_l1(&gt, &gt, &W), 0.0);
        assert_eq!(smooth_l1(&gt.translated(0.5, 0.0), &gt, &W), 0.125);
        assert_eq!(smooth_l1(&gt.translated(2.0, 0.0), &gt, &W), 1.5);
    }

    #[test]
    fn angle_residual_respects_symmetry() {
        let gt = obb(0.0, 0.0, 10.0, 4.0, 0.05);
        let pred = obb(0.0, 0.0, 10.0, 4.0, std::f64::consts::PI - 0.05);
        assert!((smooth_l1(&pred, &gt, &W) - 0.5 * 0.1f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn distance_losses_vanish_at_target() {
        let gt = obb(1.0, 2.0, 10.0, 4.0, 0.3);
        assert_eq!(l1(&gt, &gt, &W).0, 0.0);
        assert_eq!(l2(&gt, &gt, &W).0, 0.0);
        assert_eq!(giou_horizontal(&obb(1.0, 2.0, 10.0, 4.0, 0.0), &obb(1.0, 2.0, 10.0, 4.0, 0.0)).0, 0.0);
    }

    #[test]
    fn giou_disjoint_exceeds_one() {
        let a = obb(0.0, 0.0, 2.0, 2.0, 0.0);
        let b = obb(4.0, 0.0, 2.0, 2.0, 0.0);
        // IoU 0, enclosing 6x2=12, union 8: 1 - (0 - 4/12)
        let (v, g) = giou_horizontal(&a, &b);
        assert!((v - (1.0 + 4.0 / 12.0)).abs() < 1e-12);
        assert!(g[0] < 0.0, "moving toward the target must lower the loss");
    }

    fn finite_diff(f: impl Fn(&Obb) -> f64, b: &Obb, n: usize) -> f64 {
        let h = 1e-6;
        let mut p = b.params();
        let mut m = b.params();
        p[n] += h;
        m[n] -= h;
        (f(&Obb::from_params(p).unwrap()) - f(&Obb::from_params(m).unwrap())) / (2.0 * h)
    }

    #[test]
    fn giou_gradient_matches_finite_differences() {
        let gt = obb(0.3, -0.7, 9.0, 5.0, 0.0);
        for pred in [
            obb(1.9, 0.4, 7.2, 6.1, 0.0),
            obb(-3.1, 1.3, 12.0, 3.3, 0.0),
            obb(9.0, 0.2, 4.0, 4.0, 0.0),
        ] {
            let (_, g) = giou_horizontal(&pred, &gt);
            for n in 0..4 {
                let fd = finite_diff(|b| giou_horizontal(b, &gt).0, &pred, n);
                assert!((g[n] - fd).abs() < 1e-6, "param {n}: {} vs {fd}", g[n]);
            }
        }
    }

    #[test]
    fn distance_gradients_match_finite_differences() {
        let gt = obb(0.0, 0.0, 10.0, 4.0, 0.4);
        let pred = obb(0.4, -2.5, 10.7, 3.2, 0.55);
        let cases: [(fn(&Obb, &Obb, &[f64; 5]) -> (f64, Grad5), &str); 3] =
            [(l1, "l1"), (l2, "l2"), (smooth_l1_with_grad, "smooth_l1")];
        for (f, name) in cases {
            let (_, g) = f(&pred, &gt, &W);
            for n in 0..5 {
                let fd = finite_diff(|b| f(b, &gt, &W).0, &pred, n);
                assert!((g[n] - fd).abs() < 1e-6, "{name} param {n}");
            }
        }
    }

    #[test]
    fn giou_rejects_rotated() {
        let spec = LossSpec::new(LossKind::GiouHorizontal);
        let a = obb(0.0, 0.0, 2.0, 2.0, 0.1);
        assert!(spec.validate(&a, &a).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in LossKind::ALL {
            assert_eq!(LossKind::parse(k.name()), Some(k));
        }
    }
}
