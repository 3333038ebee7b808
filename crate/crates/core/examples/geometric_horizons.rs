//! Draws the two rollout horizons and compares their sample means with the
//! closed form `(1-p)/p`.

use netpg::rng::{RngStream, StreamId};

fn main() {
    let gamma: f64 = 0.95;
    let mut rng = RngStream::new(42, StreamId::Horizon);
    for (name, p) in [("T1", 1.0 - gamma), ("T2", 1.0 - gamma.sqrt())] {
        let draws = 200_000;
        let total: u64 = (0..draws).map(|_| rng.geometric(p).unwrap()).sum();
        println!(
            "{name}: p={p:.5} sample mean {:.3}, expected {:.3}",
            total as f64 / draws as f64,
            (1.0 - p) / p
        );
    }
}
