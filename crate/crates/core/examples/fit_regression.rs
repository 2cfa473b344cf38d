//! Regress one box onto a target and print the IoU trajectory.
//!
//! `cargo run --example fit_regression -- [scenario] [loss]`

use piou::harness::{find_scenario, fit, FitConfig, LossKind, LossSpec};

fn main() -> piou::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "ratio20-comb-a".into());
    let loss = args.next().and_then(|s| LossKind::parse(&s)).unwrap_or(LossKind::Piou);
    let Some(scenario) = find_scenario(&id) else {
        eprintln!("unknown scenario {id}");
        std::process::exit(2);
    };
    let trace = fit(&scenario.init, &scenario.target, &LossSpec::new(loss), &FitConfig::default())?;
    let stride = (trace.records.len() / 15).max(1);
    for r in trace.records.iter().step_by(stride) {
        println!("step {:>5}  loss {:>10.6}  iou {:.4}", r.step, r.loss, r.exact_iou);
    }
    println!(
        "{} on {id}: {} after {} steps, final iou {:.4}, reached 0.9 at {:?}",
        loss.name(),
        trace.status.name(),
        trace.last().step,
        trace.final_iou(),
        trace.steps_to_reach()
    );
    Ok(())
}
