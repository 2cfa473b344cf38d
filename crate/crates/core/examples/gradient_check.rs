//! Analytic PIoU gradients against central differences.
//!
//! `cargo run --example gradient_check -- [count] [seed]`

use piou::gradcheck::{run_gradcheck, GradCheckConfig};

fn main() -> piou::Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cases = run_gradcheck(&GradCheckConfig {
        count,
        seed,
        ..GradCheckConfig::default()
    })?;
    let names = ["cx", "cy", "w", "h", "theta"];
    let mut worst = [0.0f64; 5];
    for c in &cases {
        for (w, e) in worst.iter_mut().zip(c.rel_err) {
            *w = w.max(e);
        }
    }
    let disjoint = cases.iter().filter(|c| c.disjoint).count();
    println!("{} cases ({disjoint} disjoint)", cases.len());
    for (n, w) in names.iter().zip(worst) {
        println!("  {n:<6} max relative error {w:.2e}");
    }
    if let Some(c) = cases.iter().max_by(|a, b| a.max_rel_err().total_cmp(&b.max_rel_err())) {
        println!("worst case #{}: analytic {:?}", c.index, c.analytic);
        println!("{:>20} numeric {:?}", "", c.numeric);
    }
    Ok(())
}
