//! Averages the three gradient estimators on a two-agent bandit. All three
//! target the same vector; they differ in variance.

use netpg::estimation::{estimate_gradient, EpisodeStreams, EstimatorKind};
use netpg::policy::{AgentParams, ParamSet, PolicyKind};
use netpg::rng::derive_seed;
use netpg::testbeds::MatrixBandit;

fn main() {
    let game = MatrixBandit::new(
        2,
        2,
        0.9,
        0.7,
        vec![vec![1.0, 0.2], vec![-0.5, 0.8], vec![0.3, -1.0], vec![0.9, 0.4]],
    )
    .unwrap();
    let params = ParamSet::new(vec![
        AgentParams::from_rows(&[[0.4, -0.3], [-0.2, 0.5]]),
        AgentParams::from_rows(&[[0.1, 0.2], [0.6, -0.4]]),
    ]);
    let views = vec![params; 2];
    let episodes = 100_000;
    for est in EstimatorKind::ALL {
        let (mut sum, mut sq) = (vec![0.0; 4], vec![0.0; 4]);
        for e in 0..episodes {
            let mut s = EpisodeStreams::new(derive_seed(9, &[e]), 2);
            let g = estimate_gradient(&game, &views, PolicyKind::Networked, est, &mut s).unwrap();
            for (c, x) in g.per_agent[0].iter().enumerate() {
                sum[c] += x;
                sq[c] += x * x;
            }
        }
        let n = episodes as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let sd: Vec<f64> = sq.iter().zip(&mean).map(|(q, m)| (q / n - m * m).sqrt()).collect();
        println!("{:<9} agent 0 mean {mean:+.4?} sd {sd:.3?}", est.name());
    }
}
