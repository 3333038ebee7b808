//! Steps the newsvendor game under uniformly random actions and prints the
//! inventories and the shared reward.

use netpg::game::Simulator;
use netpg::newsvendor::{Newsvendor, NewsvendorConfig};
use netpg::rng::{RngStream, StreamId};

fn main() {
    let game = Newsvendor::new(NewsvendorConfig::default()).unwrap();
    let mut env = RngStream::new(1, StreamId::Environment);
    let mut acts = RngStream::new(1, StreamId::Custom(0));
    let mut sim = Simulator::new(&game, &mut env);
    for _ in 0..10 {
        let before = sim.state().clone();
        let joint: Vec<usize> = (0..5).map(|_| (acts.next_u64() % 5) as usize).collect();
        let (_, r) = sim.step(&joint, &mut env);
        println!(
            "period {} inventories {:?} sell {:?} -> reward {:.4}",
            before.period,
            before.inventories.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>(),
            joint,
            r[0]
        );
    }
}
