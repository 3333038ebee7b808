//! Belief error under repeated consensus with frozen parameters, one column
//! per communication topology.

use netpg::consensus::{belief_error, BeliefInit, BeliefTable, CommSchedule, CommSpec, Topology};
use netpg::policy::ParamSet;
use netpg::rng::{RngStream, StreamId};

fn main() {
    let n = 5;
    let truth = ParamSet::random_normal(n, n, 0.3, &mut RngStream::new(0, StreamId::Custom(0)));
    let mut runs: Vec<(Topology, CommSchedule, BeliefTable)> = Topology::ALL
        .into_iter()
        .map(|t| {
            let s = CommSchedule::new(CommSpec { topology: t, ..CommSpec::default() }, n).unwrap();
            (t, s, BeliefTable::new(&truth, BeliefInit::Zero))
        })
        .collect();
    print!("{:>4}", "t");
    for (t, _, _) in &runs {
        print!("{:>12}", t.name());
    }
    println!();
    for t in 0..=60u64 {
        if t % 10 == 0 {
            print!("{t:>4}");
            for (_, _, b) in &runs {
                print!("{:>12.3e}", belief_error(b, &truth));
            }
            println!();
        }
        for (_, s, b) in &mut runs {
            b.consensus_step(&truth, s, t);
        }
    }
}
