use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::fit::{fit, FitConfig, FitStatus};
use super::losses::{LossKind, LossSpec};
use super::scenarios::Scenario;
use crate::error::Result;

/// Outcome of one fit run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub scenario: String,
    pub loss: LossKind,
    /// Kernel sensitivity, for kernel-based losses.
    pub k: Option<f64>,
    pub seed: u64,
    pub final_iou: f64,
    pub steps_to_reach: Option<usize>,
    pub steps_run: usize,
    pub status: FitStatus,
    pub wall_clock: Duration,
}

fn run(scenario: &Scenario, spec: &LossSpec, cfg: &FitConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let trace = fit(&scenario.init, &scenario.target, spec, cfg)?;
    Ok(ExperimentReport {
        scenario: scenario.id.clone(),
        loss: spec.kind,
        k: spec.kind.uses_kernel().then_some(spec.kernel.k),
        seed: cfg.seed,
        final_iou: trace.final_iou(),
        steps_to_reach: trace.steps_to_reach(),
        steps_run: trace.last().step,
        status: trace.status,
        wall_clock: start.elapsed(),
    })
}

/// Runs every `(scenario, spec)` combination, scenario-major. Runs execute
/// in parallel; the output order does not depend on scheduling.
pub fn compare_losses(scenarios: &[Scenario], specs: &[LossSpec], cfg: &FitConfig) -> Result<Vec<ExperimentReport>> {
    let jobs: Vec<(&Scenario, &LossSpec)> = scenarios
        .iter()
        .flat_map(|s| specs.iter().map(move |l| (s, l)))
        .collect();
    jobs.par_iter().map(|(s, l)| run(s, l, cfg)).collect()
}

/// Fits each scenario once per kernel sensitivity in `ks`, using `base` for
/// everything but `k`.
pub fn k_sweep(scenarios: &[Scenario], ks: &[f64], base: &LossSpec, cfg: &FitConfig) -> Result<Vec<ExperimentReport>> {
    if ks.is_empty() {
        return Err(crate::Error::InvalidArgument("k sweep needs at least one k".into()));
    }
    let specs: Vec<LossSpec> = ks.iter().map(|&k| base.with_k(k)).collect();
    compare_losses(scenarios, &specs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::standard_suite;

    #[test]
    fn empty_and_single() {
        let cfg = FitConfig {
            max_steps: 3,
            ..FitConfig::default()
        };
        let spec = LossSpec::new(LossKind::Piou);
        assert!(k_sweep(&[], &[10.0], &spec, &cfg).unwrap().is_empty());
        assert!(k_sweep(&[], &[], &spec, &cfg).is_err());
        let suite = standard_suite();
        let r = k_sweep(&suite[..1], &[10.0], &spec, &cfg).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].k, Some(10.0));
        assert_eq!(r[0].scenario, suite[0].id);
    }
}
