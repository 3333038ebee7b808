//! A scaled-down version of the estimator comparison grid. Pass a scale in
//! (0, 1] as the first argument; the default 0.05 finishes in seconds.

use netpg::config::ExperimentSpec;
use netpg::expcli::{reproduce, Figure, ReproducePlan};

fn main() {
    let scale: f64 = std::env::args().nth(1).map_or(0.05, |s| s.parse().expect("scale"));
    let plan = ReproducePlan::at_scale(Figure::Fig2, ExperimentSpec::default(), scale).unwrap();
    println!("{} replications x {} iterations", plan.replications, plan.iterations);
    for r in reproduce(&plan, None, None).unwrap() {
        let fin = r.aggregate.final_value("ema_return");
        println!(
            "{:<9} α0={:<4} final ema return {:+.4} ± {:.4}",
            r.condition.label, r.alpha0, fin.mean, fin.half_width
        );
    }
}
