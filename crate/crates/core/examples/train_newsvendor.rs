//! One training run on the default newsvendor game, printing the running
//! reward and belief error every 250 iterations.

use netpg::newsvendor::Newsvendor;
use netpg::trainer::{stationarity_diagnostic, train, TrainConfig};

fn main() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let cfg = TrainConfig {
        step: netpg::trainer::StepSchedule { alpha0: 10.0, beta: 0.5 },
        ..Default::default()
    };
    let out = train(&game, &cfg).unwrap();
    for r in out.log.rows.iter().filter(|r| r.t % 250 == 0) {
        println!(
            "t={:>5} α={:.4} ema return {:+.4} belief error {:.2e}",
            r.t, r.alpha, r.ema_return, r.belief_error
        );
    }
    println!("stationarity {:.3e}", stationarity_diagnostic(&out.log, 100).unwrap());
}
