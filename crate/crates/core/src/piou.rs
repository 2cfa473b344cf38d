//! Pixels-IoU: a soft, differentiable overlap between oriented boxes.
//!
//! Every lattice pixel gets a soft membership score per box, the product of
//! two sigmoid kernels on its offsets along the box axes. Summing products of
//! scores gives a soft intersection, and the union is either the soft sum
//! `F + F' - F F'` or the cheaper `w h + w' h' - S_inter`. The ratio is the
//! PIoU and `-ln PIoU`, averaged over matched pairs, is the loss.
//!
//! Intersection sums are carried in log space. Far-apart boxes have PIoU
//! values far below the smallest `f64` (a 100 px gap at `k = 10` gives roughly
//! `e^-1000`), yet `ln PIoU` and its gradient stay finite and nonzero.
//!
//! Gradients are hand-derived with respect to the predicted box's
//! `(cx, cy, w, h, θ)`; the ground truth is held constant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::MatchSet;
use crate::obb::{enclosing_hbb, Obb, PixelPoint};
use crate::pixel::DEFAULT_SAMPLE_BUDGET;

/// Gradient with respect to `(cx, cy, w, h, θ)`.
pub type Grad5 = [f64; 5];

/// Where the kernel puts its 0.5 crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfExtentMode {
    /// Threshold at the half extents `w/2`, `h/2`, matching hard containment.
    #[default]
    Corrected,
    /// Threshold at the full extents `w`, `h`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnionMode {
    /// `Σ F + F' - F F'` over the grid.
    #[default]
    Soft,
    /// `w h + w' h' - S_inter` (the HPIoU variant).
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Sigmoid sharpness.
    pub k: f64,
    pub half_extent_mode: HalfExtentMode,
    /// Pixels added around the enclosing box before summing. `None` picks
    /// `min(3 / k * max_extent, 10)`.
    pub grid_margin: Option<f64>,
    pub union_mode: UnionMode,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            k: 10.0,
            half_extent_mode: HalfExtentMode::Corrected,
            grid_margin: None,
            union_mode: UnionMode::Soft,
        }
    }
}

impl KernelConfig {
    pub fn with_k(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn hard_union(mut self) -> Self {
        self.union_mode = UnionMode::Hard;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::InvalidArgument(format!("kernel k must be positive, got {}", self.k)));
        }
        if let Some(m) = self.grid_margin {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidArgument(format!("grid margin must be >= 0, got {m}")));
            }
        }
        Ok(())
    }

    /// Kernel threshold for a box extent.
    #[inline]
    pub fn threshold(&self, extent: f64) -> f64 {
        extent * self.threshold_slope()
    }

    #[inline]
    fn threshold_slope(&self) -> f64 {
        match self.half_extent_mode {
            HalfExtentMode::Corrected => 0.5,
            HalfExtentMode::Literal => 1.0,
        }
    }

    pub fn margin_for(&self, a: &Obb, b: &Obb) -> f64 {
        self.grid_margin.unwrap_or_else(|| {
            let ext = a.w().max(a.h()).max(b.w()).max(b.h());
            (3.0 / self.k * ext).min(10.0)
        })
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Evaluates one kernel from its logit `z = k (d - s)`.
/// Returns `(K, ln K, 1 - K)`.
#[inline]
fn kernel_parts(z: f64) -> (f64, f64, f64) {
    let e = (-z.abs()).exp();
    let ln_k = -(z.max(0.0) + e.ln_1p());
    let inv = 1.0 / (1.0 + e);
    if z >= 0.0 {
        (e * inv, ln_k, inv)
    } else {
        (inv, ln_k, e * inv)
    }
}

/// Sigmoid kernel `K(d, s) = 1 - 1 / (1 + e^{-k (d - s)})`.
///
/// Strictly decreasing in `d` with `K(s, s) = 0.5`.
pub fn kernel(d: f64, s: f64, k: f64) -> f64 {
    kernel_parts(k * (d - s)).0
}

/// `ln K(d, s)`, accurate far into the tail.
pub fn ln_kernel(d: f64, s: f64, k: f64) -> f64 {
    -softplus(k * (d - s))
}

/// Soft membership `F(p | b) = K(d_w, ·) K(d_h, ·)`.
pub fn soft_containment(b: &Obb, p: PixelPoint, cfg: &KernelConfig) -> f64 {
    let (dw, dh) = b.axis_offsets(p);
    kernel(dw, cfg.threshold(b.w()), cfg.k) * kernel(dh, cfg.threshold(b.h()), cfg.k)
}

/// Result of one soft overlap evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftOverlap {
    /// Soft intersection. May underflow to zero for far-apart boxes; see
    /// `ln_s_inter`.
    pub s_inter: f64,
    pub ln_s_inter: f64,
    pub s_union: f64,
    /// `ln PIoU`, always finite.
    pub ln_piou: f64,
    /// `∂ ln PIoU / ∂(cx, cy, w, h, θ)` of the predicted box.
    pub grad_ln: Option<Grad5>,
}

impl SoftOverlap {
    pub fn piou(&self) -> f64 {
        self.ln_piou.exp()
    }

    /// `∂ PIoU / ∂(cx, cy, w, h, θ)`.
    pub fn grad(&self) -> Option<Grad5> {
        let p = self.piou();
        self.grad_ln.map(|g| g.map(|v| v * p))
    }
}

/// Per-row partial sums. The intersection is kept as `e^max * sum`.
#[derive(Debug, Clone, Copy)]
struct Partial {
    max: f64,
    sum: f64,
    gsum: Grad5,
    union: f64,
    dunion: Grad5,
}

impl Partial {
    const EMPTY: Partial = Partial {
        max: f64::NEG_INFINITY,
        sum: 0.0,
        gsum: [0.0; 5],
        union: 0.0,
        dunion: [0.0; 5],
    };

    #[inline]
    fn push_log(&mut self, x: f64, g: &Grad5) {
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum = self.sum * scale + 1.0;
            for (acc, gi) in self.gsum.iter_mut().zip(g) {
                *acc = *acc * scale + gi;
            }
            self.max = x;
        } else {
            let w = (x - self.max).exp();
            self.sum += w;
            for (acc, gi) in self.gsum.iter_mut().zip(g) {
                *acc += w * gi;
            }
        }
    }

    fn merge(mut self, o: &Partial) -> Partial {
        if o.max > self.max {
            let scale = (self.max - o.max).exp();
            self.sum = self.sum * scale + o.sum;
            for (a, b) in self.gsum.iter_mut().zip(&o.gsum) {
                *a = *a * scale + b;
            }
            self.max = o.max;
        } else if o.max > f64::NEG_INFINITY {
            let scale = (o.max - self.max).exp();
            self.sum += o.sum * scale;
            for (a, b) in self.gsum.iter_mut().zip(&o.gsum) {
                *a += b * scale;
            }
        }
        self.union += o.union;
        for (a, b) in self.dunion.iter_mut().zip(&o.dunion) {
            *a += b;
        }
        self
    }
}

/// Integer pixel window for the soft sums.
fn soft_window(pred: &Obb, gt: &Obb, cfg: &KernelConfig, budget: u64) -> Result<(i64, i64, i64, i64)> {
    let hbb = enclosing_hbb(pred, gt).expanded(cfg.margin_for(pred, gt));
    let (i_lo, i_hi, j_lo, j_hi) = hbb.lattice();
    let n = ((i_hi - i_lo + 1).max(0) as u64).saturating_mul((j_hi - j_lo + 1).max(0) as u64);
    if n > budget {
        return Err(Error::GridTooLarge { samples: n, budget });
    }
    Ok((i_lo, i_hi, j_lo, j_hi))
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Soft intersection, union and PIoU of `pred` against `gt`.
pub fn soft_overlap(pred: &Obb, gt: &Obb, cfg: &KernelConfig, want_grad: bool) -> Result<SoftOverlap> {
    soft_overlap_with_budget(pred, gt, cfg, want_grad, DEFAULT_SAMPLE_BUDGET)
}

pub fn soft_overlap_with_budget(
    pred: &Obb,
    gt: &Obb,
    cfg: &KernelConfig,
    want_grad: bool,
    budget: u64,
) -> Result<SoftOverlap> {
    cfg.validate()?;
    let (i_lo, i_hi, j_lo, j_hi) = soft_window(pred, gt, cfg, budget)?;
    let k = cfg.k;
    let soft_union = cfg.union_mode == UnionMode::Soft;
    let slope = cfg.threshold_slope();

    let (ps, pc) = pred.theta().sin_cos();
    let (gs, gc) = gt.theta().sin_cos();
    let (ptw, pth) = (cfg.threshold(pred.w()), cfg.threshold(pred.h()));
    let (gtw, gth) = (cfg.threshold(gt.w()), cfg.threshold(gt.h()));

    let row = |j: i64| {
        let mut acc = Partial::EMPTY;
        let mut g = [0.0; 5];
        let y = j as f64;
        let pdy = y - pred.cy();
        let gdy = y - gt.cy();
        for i in i_lo..=i_hi {
            let x = i as f64;
            let pdx = x - pred.cx();
            let lw = pdx * pc - pdy * ps;
            let lh = pdx * ps + pdy * pc;
            let (kw, ln_kw, qw) = kernel_parts(k * (lw.abs() - ptw));
            let (kh, ln_kh, qh) = kernel_parts(k * (lh.abs() - pth));

            let gdx = x - gt.cx();
            let (gkw, ln_gkw, _) = kernel_parts(k * ((gdx * gc - gdy * gs).abs() - gtw));
            let (gkh, ln_gkh, _) = kernel_parts(k * ((gdx * gs + gdy * gc).abs() - gth));

            if want_grad {
                let (sw, sh) = (sign(lw), sign(lh));
                g = [
                    k * (qw * sw * pc + qh * sh * ps),
                    k * (-qw * sw * ps + qh * sh * pc),
                    k * qw * slope,
                    k * qh * slope,
                    k * (qw * sw * lh - qh * sh * lw),
                ];
            }
            acc.push_log(ln_kw + ln_kh + ln_gkw + ln_gkh, &g);
            if soft_union {
                let fp = kw * kh;
                let fg = gkw * gkh;
                let only_pred = fp * (1.0 - fg);
                acc.union += only_pred + fg;
                if want_grad {
                    for (d, gi) in acc.dunion.iter_mut().zip(&g) {
                        *d += only_pred * gi;
                    }
                }
            }
        }
        acc
    };

    let rows: Vec<Partial> = (j_lo..=j_hi).into_par_iter().map(row).collect();
    let total = rows.iter().fold(Partial::EMPTY, |a, r| a.merge(r));
    finish(pred, gt, cfg, total, want_grad)
}

fn finish(pred: &Obb, gt: &Obb, cfg: &KernelConfig, total: Partial, want_grad: bool) -> Result<SoftOverlap> {
    let ln_s_inter = total.max + total.sum.ln();
    let s_inter = ln_s_inter.exp();
    let dln_inter = total.gsum.map(|v| v / total.sum);
    let (s_union, dln_union) = match cfg.union_mode {
        UnionMode::Soft => (total.union, total.dunion.map(|v| v / total.union)),
        UnionMode::Hard => {
            let u = pred.area() + gt.area() - s_inter;
            if !(u > 0.0) {
                return Err(Error::DegenerateUnion(u));
            }
            let mut du = dln_inter.map(|v| -s_inter * v);
            du[2] += pred.h();
            du[3] += pred.w();
            (u, du.map(|v| v / u))
        }
    };
    let ln_piou = ln_s_inter - s_union.ln();
    let grad_ln = want_grad.then(|| {
        let mut g = [0.0; 5];
        for n in 0..5 {
            g[n] = dln_inter[n] - dln_union[n];
        }
        g
    });
    Ok(SoftOverlap {
        s_inter,
        ln_s_inter,
        s_union,
        ln_piou,
        grad_ln,
    })
}

/// Axis-aligned evaluation for boxes with `θ = 0`, using `d_w = |cx - i|`
/// and `d_h = |cy - j|`. The kernels factor over the two axes so the grid sum
/// splits into two one-dimensional sums.
pub fn soft_overlap_horizontal(pred: &Obb, gt: &Obb, cfg: &KernelConfig, want_grad: bool) -> Result<SoftOverlap> {
    cfg.validate()?;
    if pred.theta() != 0.0 || gt.theta() != 0.0 {
        return Err(Error::InvalidArgument("horizontal path needs theta = 0 on both boxes".into()));
    }
    let (i_lo, i_hi, j_lo, j_hi) = soft_window(pred, gt, cfg, DEFAULT_SAMPLE_BUDGET)?;
    let k = cfg.k;
    let slope = cfg.threshold_slope();
    let x = AxisSums::new(i_lo, i_hi, pred.cx(), cfg.threshold(pred.w()), gt.cx(), cfg.threshold(gt.w()), k);
    let y = AxisSums::new(j_lo, j_hi, pred.cy(), cfg.threshold(pred.h()), gt.cy(), cfg.threshold(gt.h()), k);

    // intersection
    let ln_s_inter = x.ln_both + y.ln_both;
    let s_inter = ln_s_inter.exp();
    let dln_inter = [
        k * x.both_q_sign,
        k * y.both_q_sign,
        k * slope * x.both_q,
        k * slope * y.both_q,
        k * (x.both_q_sign * y.both_offset - y.both_q_sign * x.both_offset),
    ];

    let (s_union, dln_union) = match cfg.union_mode {
        UnionMode::Soft => {
            let u = x.pred * y.pred + x.gt * y.gt - s_inter;
            // ∂U = Σ F_p g - Σ F_p F_g g, each term factored by axis
            let du = [
                k * (x.pred_q_sign * y.pred - s_inter * x.both_q_sign),
                k * (y.pred_q_sign * x.pred - s_inter * y.both_q_sign),
                k * slope * (x.pred_q * y.pred - s_inter * x.both_q),
                k * slope * (y.pred_q * x.pred - s_inter * y.both_q),
                k * ((x.pred_q_sign * y.pred_offset - y.pred_q_sign * x.pred_offset)
                    - s_inter * (x.both_q_sign * y.both_offset - y.both_q_sign * x.both_offset)),
            ];
            (u, du.map(|v| v / u))
        }
        UnionMode::Hard => {
            let u = pred.area() + gt.area() - s_inter;
            if !(u > 0.0) {
                return Err(Error::DegenerateUnion(u));
            }
            let mut du = dln_inter.map(|v| -s_inter * v);
            du[2] += pred.h();
            du[3] += pred.w();
            (u, du.map(|v| v / u))
        }
    };
    let ln_piou = ln_s_inter - s_union.ln();
    let grad_ln = want_grad.then(|| {
        let mut g = [0.0; 5];
        for n in 0..5 {
            g[n] = dln_inter[n] - dln_union[n];
        }
        g
    });
    Ok(SoftOverlap {
        s_inter,
        ln_s_inter,
        s_union,
        ln_piou,
        grad_ln,
    })
}

/// One-axis sums for the separable path. With `a` the predicted box's
/// kernel, `b` the ground truth's, `q = 1 - a`, `σ = sign(i - c)` and
/// `δ = i - c`:
///
/// * `pred = Σ a`, `gt = Σ b`
/// * `ln_both = ln Σ a b`, and `both_*` are `a b`-weighted means of `q σ`,
///   `q` and `δ`
/// * `pred_*` are plain sums of `a q σ`, `a q` and `a δ`
struct AxisSums {
    pred: f64,
    gt: f64,
    ln_both: f64,
    both_q_sign: f64,
    both_q: f64,
    both_offset: f64,
    pred_q_sign: f64,
    pred_q: f64,
    pred_offset: f64,
}

impl AxisSums {
    fn new(lo: i64, hi: i64, pc: f64, pt: f64, gc: f64, gt: f64, k: f64) -> Self {
        let mut terms = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut s = AxisSums {
            pred: 0.0,
            gt: 0.0,
            ln_both: f64::NEG_INFINITY,
            both_q_sign: 0.0,
            both_q: 0.0,
            both_offset: 0.0,
            pred_q_sign: 0.0,
            pred_q: 0.0,
            pred_offset: 0.0,
        };
        let mut max = f64::NEG_INFINITY;
        for i in lo..=hi {
            let x = i as f64;
            let (a, ln_a, q) = kernel_parts(k * ((pc - x).abs() - pt));
            let (b, ln_b, _) = kernel_parts(k * ((gc - x).abs() - gt));
            let sg = sign(x - pc);
            let off = x - pc;
            s.pred += a;
            s.gt += b;
            s.pred_q_sign += a * q * sg;
            s.pred_q += a * q;
            s.pred_offset += a * off;
            max = max.max(ln_a + ln_b);
            terms.push((ln_a + ln_b, q, sg, off));
        }
        let mut sum = 0.0;
        for &(l, q, sg, off) in &terms {
            let w = (l - max).exp();
            sum += w;
            s.both_q_sign += w * q * sg;
            s.both_q += w * q;
            s.both_offset += w * off;
        }
        s.ln_both = max + sum.ln();
        s.both_q_sign /= sum;
        s.both_q /= sum;
        s.both_offset /= sum;
        s
    }
}

/// Optional per-parameter gradient mask, e.g. to freeze the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamMask(pub [bool; 5]);

impl Default for ParamMask {
    fn default() -> Self {
        Self([true; 5])
    }
}

impl ParamMask {
    pub const ALL: ParamMask = ParamMask([true; 5]);
    pub const FROZEN_CENTER: ParamMask = ParamMask([false, false, true, true, true]);
    pub const NO_ANGLE: ParamMask = ParamMask([true, true, true, true, false]);

    pub fn apply(&self, g: &mut Grad5) {
        for (v, keep) in g.iter_mut().zip(self.0) {
            if !keep {
                *v = 0.0;
            }
        }
    }
}

/// Loss over a set of matched pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PiouLoss {
    pub value: f64,
    pub pair_count: usize,
    /// `∂ loss / ∂ pred` for each pair, in pair order.
    pub grads: Vec<Grad5>,
}

/// `-(1/|M|) Σ ln PIoU(pred, gt)` over the matched set.
pub fn piou_loss(pairs: &MatchSet, cfg: &KernelConfig, want_grad: bool) -> Result<PiouLoss> {
    piou_loss_pairs(&pairs.box_pairs(), cfg, want_grad)
}

/// Same as [`piou_loss`] on bare `(pred, gt)` pairs. An empty set gives 0.
pub fn piou_loss_pairs(pairs: &[(Obb, Obb)], cfg: &KernelConfig, want_grad: bool) -> Result<PiouLoss> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Ok(PiouLoss {
            value: 0.0,
            pair_count: 0,
            grads: Vec::new(),
        });
    }
    let overlaps = pairs
        .par_iter()
        .map(|(p, g)| soft_overlap(p, g, cfg, want_grad))
        .collect::<Result<Vec<_>>>()?;
    Ok(loss_from_overlaps(&overlaps))
}

pub(crate) fn loss_from_overlaps(overlaps: &[SoftOverlap]) -> PiouLoss {
    let n = overlaps.len() as f64;
    let value = -overlaps.iter().map(|o| o.ln_piou).sum::<f64>() / n;
    let grads = overlaps
        .iter()
        .filter_map(|o| o.grad_ln.map(|g| g.map(|v| -v / n)))
        .collect();
    PiouLoss {
        value,
        pair_count: overlaps.len(),
        grads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obb(cx: f64, cy: f64, w: f64, h: f64, t: f64) -> Obb {
        Obb::new(cx, cy, w, h, t).unwrap()
    }

    #[test]
    fn kernel_values() {
        for k in [0.5, 10.0, 300.0] {
            assert_eq!(kernel(3.0, 3.0, k), 0.5);
        }
        let direct = |d: f64, s: f64, k: f64| 1.0 - 1.0 / (1.0 + (-k * (d - s)).exp());
        assert!((kernel(0.0, 1.0, 10.0) - direct(0.0, 1.0, 10.0)).abs() < 1e-15);
        assert!((kernel(0.0, 1.0, 10.0) - 0.999_954_6).abs() < 1e-7);
        assert!((kernel(2.0, 1.0, 10.0) - direct(2.0, 1.0, 10.0)).abs() < 1e-15);
        assert!((kernel(2.0, 1.0, 10.0) - 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn kernel_is_strictly_decreasing_and_positive() {
        let mut prev = kernel(-5.0, 1.0, 10.0);
        for n in -49..200 {
            let v = kernel(n as f64 * 0.1, 1.0, 10.0);
            // saturates to 1.0 in floating point deep inside
            assert!(v < prev || v == 1.0 && prev == 1.0);
            assert!(v > 0.0);
            prev = v;
        }
        let mut prev = ln_kernel(-5.0, 1.0, 10.0);
        for n in -49..2000 {
            let v = ln_kernel(n as f64 * 0.1, 1.0, 10.0);
            assert!(v < prev || v == 0.0 && prev == 0.0);
            prev = v;
        }
        assert!(ln_kernel(1e4, 1.0, 10.0).is_finite());
        assert!((ln_kernel(1e4, 1.0, 10.0) + 10.0 * (1e4 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn soft_containment_examples() {
        let cfg = KernelConfig::default();
        let b = obb(0.0, 0.0, 20.0, 20.0, 0.0);
        let f = soft_containment(&b, PixelPoint::new(0.0, 0.0), &cfg);
        let k0 = kernel(0.0, 10.0, 10.0);
        assert!((f - k0 * k0).abs() < 1e-15);
        assert!(f > 1.0 - 1e-15);
        // threshold 1 instead of 10 gives the K(0, 1)^2 value
        let g = soft_containment(&obb(0.0, 0.0, 2.0, 2.0, 0.0), PixelPoint::new(0.0, 0.0), &cfg);
        assert!((g - 0.99991).abs() < 1e-5);

        let b = obb(0.0, 0.0, 20.0, 6.0, 0.0);
        let edge_mid = soft_containment(&b, PixelPoint::new(0.0, 3.0), &cfg);
        assert!((edge_mid - 0.5 * kernel(0.0, 10.0, 10.0)).abs() < 1e-15);

        let far = soft_containment(&b, PixelPoint::new(12.0, 0.0), &cfg);
        assert!(far < 1e-4);
    }

    #[test]
    fn literal_mode_uses_full_extent() {
        let cfg = KernelConfig {
            half_extent_mode: HalfExtentMode::Literal,
            ..KernelConfig::default()
        };
        let b = obb(0.0, 0.0, 4.0, 4.0, 0.0);
        let f = soft_containment(&b, PixelPoint::new(4.0, 0.0), &cfg);
        assert!((f - 0.5 * kernel(0.0, 4.0, 10.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_pairs_give_zero_loss() {
        let l = piou_loss_pairs(&[], &KernelConfig::default(), true).unwrap();
        assert_eq!(l.value, 0.0);
        assert_eq!(l.pair_count, 0);
    }

    #[test]
    fn loss_is_mean_negative_log() {
        let mk = |ln_piou: f64| SoftOverlap {
            s_inter: 0.0,
            ln_s_inter: 0.0,
            s_union: 1.0,
            ln_piou,
            grad_ln: None,
        };
        assert_eq!(loss_from_overlaps(&[mk(0.0)]).value, 0.0);
        assert!((loss_from_overlaps(&[mk((-1f64).exp().ln())]).value - 1.0).abs() < 1e-15);
        assert!((loss_from_overlaps(&[mk(-1.0), mk(-3.0)]).value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_config_rejected() {
        let a = obb(0.0, 0.0, 4.0, 4.0, 0.0);
        assert!(soft_overlap(&a, &a, &KernelConfig::with_k(0.0), false).is_err());
        assert!(soft_overlap(&a, &a, &KernelConfig::with_k(f64::NAN), false).is_err());
        let cfg = KernelConfig {
            grid_margin: Some(-1.0),
            ..KernelConfig::default()
        };
        assert!(soft_overlap(&a, &a, &cfg, false).is_err());
    }

    #[test]
    fn mask_zeroes_frozen_params() {
        let mut g = [1.0, 2.0, 3.0, 4.0, 5.0];
        ParamMask::FROZEN_CENTER.apply(&mut g);
        assert_eq!(g, [0.0, 0.0, 3.0, 4.0, 5.0]);
    }
}
