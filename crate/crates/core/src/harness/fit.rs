use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::losses::LossSpec;
use super::{CONVERGED_IOU, REACH_IOU};
use crate::error::Result;
use crate::exact::exact_iou;
use crate::obb::Obb;

const MOMENTUM: f64 = 0.9;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MIN_GRAD_NORM: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Gd,
    GdMomentum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub optimizer: Optimizer,
    /// Initial step length of every line search.
    pub lr: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Standard deviation of a seeded Gaussian jitter applied to the initial
    /// `(cx, cy)` in pixels; 0 leaves the initial box untouched.
    pub init_jitter: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::GdMomentum,
            lr: 1.0,
            max_steps: 2000,
            seed: 0,
            init_jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    MaxSteps,
    Diverged,
}

impl FitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::MaxSteps => "max_steps",
            FitStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRecord {
    pub step: usize,
    pub params: Obb,
    pub loss: f64,
    pub exact_iou: f64,
    /// Norm of the gradient in the optimized coordinates
    /// `(cx, cy, ln w, ln h, θ)`.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub records: Vec<FitRecord>,
    pub status: FitStatus,
}

impl FitTrace {
    pub fn last(&self) -> &FitRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    pub fn final_iou(&self) -> f64 {
        self.last().exact_iou
    }

    /// First step whose exact IoU reaches `iou`.
    pub fn steps_to(&self, iou: f64) -> Option<usize> {
        self.records.iter().find(|r| r.exact_iou >= iou).map(|r| r.step)
    }

    pub fn steps_to_reach(&self) -> Option<usize> {
        self.steps_to(REACH_IOU)
    }
}

/// Optimized coordinates: width and height move in log space so they stay
/// positive.
fn to_vars(b: &Obb) -> [f64; 5] {
    [b.cx(), b.cy(), b.w().ln(), b.h().ln(), b.theta()]
}

fn from_vars(z: &[f64; 5]) -> Option<Obb> {
    if z.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Obb::new(z[0], z[1], z[2].exp(), z[3].exp(), z[4]).ok()
}

struct Eval {
    loss: f64,
    grad: [f64; 5],
}

fn evaluate(loss: &LossSpec, b: &Obb, target: &Obb) -> Option<Eval> {
    let (value, g) = loss.evaluate(b, target, true).ok()?;
    let g = g?;
    // chain rule into log extents
    let grad = [g[0], g[1], g[2] * b.w(), g[3] * b.h(), g[4]];
    (value.is_finite() && grad.iter().all(|v| v.is_finite())).then_some(Eval { loss: value, grad })
}

fn norm(v: &[f64; 5]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regresses `init` toward `target` under `loss`.
///
/// Each step picks a descent direction (the negative gradient, or a momentum
/// direction when that still descends) and a step length by backtracking
/// from `lr` until the Armijo condition holds, so the loss never increases.
pub fn fit(init: &Obb, target: &Obb, loss: &LossSpec, cfg: &FitConfig) -> Result<FitTrace> {
    loss.validate(init, target)?;
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(crate::Error::InvalidArgument(format!("lr must be positive, got {}", cfg.lr)));
    }
    if cfg.max_steps == 0 {
        return Err(crate::Error::InvalidArgument("max_steps must be >= 1".into()));
    }

    let mut start = *init;
    if cfg.init_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = Normal::new(0.0, cfg.init_jitter).expect("positive std");
        start = start.translated(n.sample(&mut rng), n.sample(&mut rng));
    }

    let mut z = to_vars(&start);
    let mut b = start;
    let mut records = Vec::new();
    let Some(mut cur) = evaluate(loss, &b, target) else {
        return Ok(FitTrace {
            records: vec![FitRecord {
                step: 0,
                params: b,
                loss: f64::NAN,
                exact_iou: exact_iou(&b, target),
                grad_norm: f64::NAN,
            }],
            status: FitStatus::Diverged,
        });
    };
    let record = |step: usize, b: &Obb, e: &Eval| FitRecord {
        step,
        params: *b,
        loss: e.loss,
        exact_iou: exact_iou(b, target),
        grad_norm: norm(&e.grad),
    };
    records.push(record(0, &b, &cur));
    if records[0].exact_iou >= CONVERGED_IOU || records[0].grad_norm < MIN_GRAD_NORM {
        return Ok(FitTrace {
            records,
            status: FitStatus::Converged,
        });
    }

    let mut velocity = [0.0; 5];
    for step in 1..=cfg.max_steps {
        let dir = match cfg.optimizer {
            Optimizer::Gd => cur.grad.map(|g| -g),
            Optimizer::GdMomentum => {
                for n in 0..5 {
                    velocity[n] = MOMENTUM * velocity[n] - cur.grad[n];
                }
                if dot(&velocity, &cur.grad) >= 0.0 {
                    velocity = cur.grad.map(|g| -g);
                }
                velocity
            }
        };
        let slope = dot(&cur.grad, &dir);

        let mut trial = cfg.lr;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut zt = z;
            for n in 0..5 {
                zt[n] += trial * dir[n];
            }
            if let Some(bt) = from_vars(&zt) {
                if let Some(e) = evaluate(loss, &bt, target) {
                    if e.loss <= cur.loss + ARMIJO * trial * slope {
                        accepted = Some((zt, bt, e));
                        break;
                    }
                }
            }
            trial *= 0.5;
        }
        let Some((zt, bt, e)) = accepted else {
            // no descent at any step length: stationary to working precision
            return Ok(FitTrace {
                records,
                status: FitStatus::Converged,
            });
        };
        z = zt;
        b = bt;
        cur = e;
        let r = record(step, &b, &cur);
        let done = r.exact_iou >= CONVERGED_IOU || r.grad_norm < MIN_GRAD_NORM;
        records.push(r);
        if done {
            return Ok(FitTrace {
                records,
                status: FitStatus::Converged,
            });
        }
    }
    Ok(FitTrace {
        records,
        status: FitStatus::MaxSteps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::LossKind;

    #[test]
    fn init_at_target_converges_immediately() {
        let t = Obb::new(0.0, 0.0, 100.0, 5.0, 0.5).unwrap();
        let trace = fit(&t, &t, &LossSpec::new(LossKind::SmoothL1), &FitConfig::default()).unwrap();
        assert_eq!(trace.status, FitStatus::Converged);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.final_iou(), 1.0);
    }

    #[test]
    fn loss_never_increases() {
        let target = Obb::new(0.0, 0.0, 40.0, 8.0, 0.4).unwrap();
        let init = Obb::new(3.0, -2.0, 46.0, 7.0, 0.6).unwrap();
        for kind in [LossKind::Piou, LossKind::SmoothL1, LossKind::L2] {
            let cfg = FitConfig {
                max_steps: 60,
                ..FitConfig::default()
            };
            let trace = fit(&init, &target, &LossSpec::new(kind), &cfg).unwrap();
            for w in trace.records.windows(2) {
                assert!(w[1].loss <= w[0].loss, "{kind}: {} -> {}", w[0].loss, w[1].loss);
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let t = Obb::new(0.0, 0.0, 10.0, 5.0, 0.0).unwrap();
        let spec = LossSpec::new(LossKind::L1);
        let bad_lr = FitConfig {
            lr: 0.0,
            ..FitConfig::default()
        };
        assert!(fit(&t, &t, &spec, &bad_lr).is_err());
        let no_steps = FitConfig {
            max_steps: 0,
            ..FitConfig::default()
        };
        assert!(fit(&t, &t, &spec, &no_steps).is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let target = Obb::new(0.0, 0.0, 20.0, 10.0, 0.0).unwrap();
        let init = Obb::new(2.0, 1.0, 20.0, 10.0, 0.0).unwrap();
        let cfg = FitConfig {
            max_steps: 5,
            seed: 11,
            init_jitter: 1.0,
            ..FitConfig::default()
        };
        let spec = LossSpec::new(LossKind::L2);
        let a = fit(&init, &target, &spec, &cfg).unwrap();
        let b = fit(&init, &target, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.records[0].params, init);
    }
}
