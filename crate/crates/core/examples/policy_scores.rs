//! Action probabilities and score vectors of the networked and the
//! independent softmax policy, with a finite-difference check.

use netpg::policy::{policy_probs, score_function, ParamSet, PolicyKind};
use netpg::rng::{RngStream, StreamId};

fn main() {
    let mut rng = RngStream::new(3, StreamId::Custom(0));
    let params = ParamSet::random_normal(3, 3, 1.0, &mut rng);
    let features = [0.5, 1.5, 2.0];
    for kind in [PolicyKind::Networked, PolicyKind::Independent] {
        let probs = policy_probs(0, &features, &params, kind);
        println!("{}: π_0 = {probs:.4?}", kind.name());
        // how agent 1's parameters move agent 0's log-probability of action 2
        let score = score_function(1, 0, 2, &features, &params, kind);
        let h = 1e-6;
        let fd: Vec<f64> = (0..score.len())
            .map(|c| {
                let at = |d: f64| {
                    let mut p = params.clone();
                    p.agent_mut(1).as_mut_slice()[c] += d;
                    policy_probs(0, &features, &p, kind)[2].ln()
                };
                (at(h) - at(-h)) / (2.0 * h)
            })
            .collect();
        println!("  score   {score:+.6?}\n  finite  {fd:+.6?}");
    }
}
