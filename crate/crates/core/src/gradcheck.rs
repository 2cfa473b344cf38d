//! Analytic PIoU gradients against central finite differences.
//!
//! Both sides are taken on `ln PIoU`, which is what the loss differentiates.
//! The membership kernels depend on `|offset|` along each box axis, so the
//! analytic gradient uses a subgradient wherever a lattice pixel sits on one
//! of the predicted box's axes; configurations with a pixel that close are
//! resampled.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::exact::intersection_area;
use crate::obb::{enclosing_hbb, Obb};
use crate::piou::{soft_overlap, Grad5, KernelConfig, UnionMode};

/// Finite-difference step for `cx`, `cy`, `w`, `h`, pixels.
pub const LINEAR_STEP: f64 = 1e-4;

/// Finite-difference step for `θ`, radians.
pub const ANGLE_STEP: f64 = 1e-5;

/// Minimum distance between a lattice pixel and a predicted-box axis.
pub const KINK_TOL: f64 = 1e-3;

const MAX_ATTEMPTS: usize = 10_000;

const PARAMS: [&str; 5] = ["cx", "cy", "w", "h", "theta"];

#[derive(Debug, Clone, PartialEq)]
pub struct GradCase {
    pub index: usize,
    pub pred: Obb,
    pub gt: Obb,
    pub union_mode: UnionMode,
    /// The boxes do not intersect at all.
    pub disjoint: bool,
    pub analytic: Grad5,
    pub numeric: Grad5,
    pub rel_err: Grad5,
}

impl GradCase {
    pub fn max_rel_err(&self) -> f64 {
        self.rel_err.iter().cloned().fold(0.0, f64::max)
    }
}

/// Central differences of `ln PIoU` in each predicted parameter.
pub fn numeric_gradient(pred: &Obb, gt: &Obb, cfg: &KernelConfig) -> Result<Grad5> {
    let mut g = [0.0; 5];
    let p = pred.params();
    for n in 0..5 {
        let step = if n == 4 { ANGLE_STEP } else { LINEAR_STEP };
        let mut hi = p;
        let mut lo = p;
        hi[n] += step;
        lo[n] -= step;
        let f_hi = soft_overlap(&Obb::from_params(hi)?, gt, cfg, false)?.ln_piou;
        let f_lo = soft_overlap(&Obb::from_params(lo)?, gt, cfg, false)?.ln_piou;
        g[n] = (f_hi - f_lo) / (2.0 * step);
    }
    Ok(g)
}

/// Per-component `|a - n| / max(|a|, |n|, 1e-3 ‖n‖∞)`. The last term keeps
/// components that are tiny next to the rest of the gradient from
/// dominating through rounding noise alone.
pub fn relative_errors(analytic: &Grad5, numeric: &Grad5) -> Grad5 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = [0.0; 5];
    for n in 0..5 {
        let (a, d) = (analytic[n], numeric[n]);
        let denom = a.abs().max(d.abs()).max(1e-3 * scale).max(1e-300);
        out[n] = (a - d).abs() / denom;
    }
    out
}

/// True if some pixel of the summation window lies within [`KINK_TOL`] of
/// an axis of `pred`, widened by how far the finite-difference steps move
/// that pixel's local coordinates.
pub fn near_kink(pred: &Obb, gt: &Obb, cfg: &KernelConfig) -> bool {
    let hbb = enclosing_hbb(pred, gt).expanded(cfg.margin_for(pred, gt));
    let (i_lo, i_hi, j_lo, j_hi) = hbb.lattice();
    let (s, c) = pred.theta().sin_cos();
    for j in j_lo..=j_hi {
        let dy = j as f64 - pred.cy();
        for i in i_lo..=i_hi {
            let dx = i as f64 - pred.cx();
            let lw = dx * c - dy * s;
            let lh = dx * s + dy * c;
            let tol = KINK_TOL + LINEAR_STEP + ANGLE_STEP * dx.hypot(dy);
            if lw.abs() < tol || lh.abs() < tol {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub count: usize,
    pub seed: u64,
    pub k: f64,
    /// Box sides are uniform in this range, pixels.
    pub dim_range: (f64, f64),
    /// Every n-th case is a disjoint pair; 0 disables them.
    pub disjoint_every: usize,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 0,
            k: 10.0,
            dim_range: (4.0, 80.0),
            disjoint_every: 5,
        }
    }
}

fn sample_pair(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig, disjoint: bool) -> (Obb, Obb) {
    let (lo, hi) = cfg.dim_range;
    let mut side = || rng.random_range(lo..=hi);
    let (gw, gh, pw, ph) = (side(), side(), side(), side());
    let gt = Obb::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        gw,
        gh,
        rng.random_range(0.0..PI),
    )
    .expect("valid");
    let (cx, cy) = if disjoint {
        // circumscribed circles apart
        let gap = 0.5 * (gw.hypot(gh) + pw.hypot(ph)) + rng.random_range(1.0..20.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        (gt.cx() + gap * phi.cos(), gt.cy() + gap * phi.sin())
    } else {
        let r = 0.5 * gw.min(gh);
        (gt.cx() + rng.random_range(-r..=r), gt.cy() + rng.random_range(-r..=r))
    };
    let pred = Obb::new(cx, cy, pw, ph, rng.random_range(0.0..PI)).expect("valid");
    (pred, gt)
}

/// Samples `count` configurations away from kinks and compares gradients.
/// Cases alternate between soft and hard union.
pub fn run_gradcheck(cfg: &GradCheckConfig) -> Result<Vec<GradCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut setups = Vec::with_capacity(cfg.count);
    for index in 0..cfg.count {
        let disjoint = cfg.disjoint_every > 0 && index % cfg.disjoint_every == 0;
        let union_mode = if index % 2 == 0 { UnionMode::Soft } else { UnionMode::Hard };
        let kernel = KernelConfig {
            union_mode,
            ..KernelConfig::with_k(cfg.k)
        };
        let mut attempt = 0;
        let (pred, gt) = loop {
            let pair = sample_pair(&mut rng, cfg, disjoint);
            attempt += 1;
            if !near_kink(&pair.0, &pair.1, &kernel) || attempt >= MAX_ATTEMPTS {
                break pair;
            }
        };
        setups.push((index, pred, gt, kernel, disjoint));
    }
    setups
        .into_par_iter()
        .map(|(index, pred, gt, kernel, disjoint)| {
            let analytic = soft_overlap(&pred, &gt, &kernel, true)?
                .grad_ln
                .expect("gradient requested");
            let numeric = numeric_gradient(&pred, &gt, &kernel)?;
            Ok(GradCase {
                index,
                pred,
                gt,
                union_mode: kernel.union_mode,
                disjoint: disjoint && intersection_area(&pred, &gt) == 0.0,
                analytic,
                numeric,
                rel_err: relative_errors(&analytic, &numeric),
            })
        })
        .collect()
}

/// One row per case and parameter.
pub fn gradcheck_csv(cases: &[GradCase]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "disjoint", "union", "param", "analytic", "numeric", "rel_err"])?;
    for c in cases {
        let union = match c.union_mode {
            UnionMode::Soft => "soft",
            UnionMode::Hard => "hard",
        };
        for n in 0..5 {
            w.write_record([
                c.index.to_string(),
                c.disjoint.to_string(),
                union.to_string(),
                PARAMS[n].to_string(),
                format!("{:e}", c.analytic[n]),
                format!("{:e}", c.numeric[n]),
                format!("{:e}", c.rel_err[n]),
            ])?;
        }
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}
