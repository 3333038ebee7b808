//! Reference computations written against the definitions, not the library.
#![allow(dead_code)]

use netpg::policy::{AgentParams, ParamSet};
use netpg::rng::{RngStream, StreamId};
use netpg::testbeds::{joint_from_index, TwoStateChain};

/// Parameter table as plain rows: `theta[agent][k] = [intercept, slope]`.
pub type Table = Vec<Vec<[f64; 2]>>;

pub fn to_params(theta: &Table) -> ParamSet {
    ParamSet::new(theta.iter().map(|rows| AgentParams::from_rows(rows)).collect())
}

pub fn from_params(p: &ParamSet) -> Table {
    p.agents()
        .iter()
        .map(|a| (0..a.num_actions()).map(|k| [a.intercept(k), a.slope(k)]).collect())
        .collect()
}

pub fn random_table(n: usize, k: usize, scale: f64, rng: &mut RngStream) -> Table {
    (0..n)
        .map(|_| {
            (0..k)
                .map(|_| [scale * (2.0 * rng.uniform() - 1.0), scale * (2.0 * rng.uniform() - 1.0)])
                .collect()
        })
        .collect()
}

pub fn rng(seed: u64) -> RngStream {
    RngStream::new(seed, StreamId::Custom(seed))
}

/// Action probabilities evaluated directly from the logit definition.
pub fn ref_probs(agent: usize, features: &[f64], theta: &Table, networked: bool) -> Vec<f64> {
    let n = theta.len();
    let k = theta[0].len();
    let x = |j: usize, a: usize| theta[j][a][0] + theta[j][a][1] * features[j];
    let logits: Vec<f64> = (0..k)
        .map(|a| {
            let mut z = x(agent, a);
            if networked && n > 1 {
                let others: Vec<f64> = (0..n).filter(|&j| j != agent).map(|j| x(j, a)).collect();
                let m = others.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mean = others.iter().map(|v| (v - m).exp()).sum::<f64>() / others.len() as f64;
                z -= m + mean.ln();
            }
            z
        })
        .collect();
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Joint action probabilities indexed by `Σ a_i K^i`.
pub fn joint_probs(features: &[f64], theta: &Table, networked: bool) -> Vec<f64> {
    let n = theta.len();
    let k = theta[0].len();
    let per: Vec<Vec<f64>> = (0..n).map(|i| ref_probs(i, features, theta, networked)).collect();
    (0..k.pow(n as u32))
        .map(|c| {
            joint_from_index(c, n, k)
                .iter()
                .enumerate()
                .map(|(i, &a)| per[i][a])
                .product()
        })
        .collect()
}

/// Exact values of the two-state chain by forward propagation of the state law
/// over a horizon long enough for `γ^H` to vanish in double precision.
pub struct ChainOracle {
    pub v: [Vec<f64>; 2],
    /// `q[state][joint][agent]`
    pub q: [Vec<Vec<f64>>; 2],
    /// Discounted state occupancy from the initial law, normalized.
    pub occupancy: [f64; 2],
}

pub fn chain_oracle(chain: &TwoStateChain, theta: &Table, networked: bool, gamma: f64) -> ChainOracle {
    let n = theta.len();
    let k = theta[0].len();
    let joints = k.pow(n as u32);
    let pi: Vec<Vec<f64>> = (0..2)
        .map(|s| joint_probs(&vec![s as f64; n], theta, networked))
        .collect();
    let mean_reward = |s: usize, agent: usize| -> f64 {
        (0..joints)
            .map(|c| pi[s][c] * chain.reward_of(s, &joint_from_index(c, n, k))[agent])
            .sum()
    };
    let to_one = |s: usize| -> f64 {
        (0..joints)
            .map(|c| pi[s][c] * chain.prob_to_one(s, &joint_from_index(c, n, k)))
            .sum()
    };
    let horizon = ((1e-18f64).ln() / gamma.ln()).ceil() as usize;
    let value_from = |start: [f64; 2], agent: usize| -> f64 {
        let mut law = start;
        let mut total = 0.0;
        let mut disc = 1.0;
        for _ in 0..horizon {
            total += disc * (law[0] * mean_reward(0, agent) + law[1] * mean_reward(1, agent));
            let one = law[0] * to_one(0) + law[1] * to_one(1);
            law = [1.0 - one, one];
            disc *= gamma;
        }
        total
    };
    let v = [
        (0..n).map(|a| value_from([1.0, 0.0], a)).collect::<Vec<_>>(),
        (0..n).map(|a| value_from([0.0, 1.0], a)).collect::<Vec<_>>(),
    ];
    let q_at = |s: usize| -> Vec<Vec<f64>> {
        (0..joints)
            .map(|c| {
                let a = joint_from_index(c, n, k);
                let p1 = chain.prob_to_one(s, &a);
                (0..n)
                    .map(|ag| chain.reward_of(s, &a)[ag] + gamma * ((1.0 - p1) * v[0][ag] + p1 * v[1][ag]))
                    .collect()
            })
            .collect()
    };
    let q = [q_at(0), q_at(1)];
    let mut law = [1.0 - chain.start_in_one(), chain.start_in_one()];
    let mut occ = [0.0, 0.0];
    let mut disc = 1.0 - gamma;
    for _ in 0..horizon {
        occ[0] += disc * law[0];
        occ[1] += disc * law[1];
        let one = law[0] * to_one(0) + law[1] * to_one(1);
        law = [1.0 - one, one];
        disc *= gamma;
    }
    ChainOracle { v, q, occupancy: occ }
}

/// Expected value of the initial state under the chain's start law.
pub fn chain_utility(chain: &TwoStateChain, theta: &Table, networked: bool, gamma: f64, agent: usize) -> f64 {
    let o = chain_oracle(chain, theta, networked, gamma);
    (1.0 - chain.start_in_one()) * o.v[0][agent] + chain.start_in_one() * o.v[1][agent]
}

/// Central difference of `f` with respect to every entry of `theta[agent]`,
/// flattened as `[k][intercept, slope]`.
pub fn fd_gradient<F: Fn(&Table) -> f64>(theta: &Table, agent: usize, h: f64, f: F) -> Vec<f64> {
    let k = theta[agent].len();
    let mut g = Vec::with_capacity(2 * k);
    for a in 0..k {
        for c in 0..2 {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[agent][a][c] += h;
            minus[agent][a][c] -= h;
            g.push((f(&plus) - f(&minus)) / (2.0 * h));
        }
    }
    g
}

/// Running mean and variance per coordinate.
#[derive(Clone, Debug)]
pub struct Moments {
    pub count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / c;
            *s += d * (v - *m);
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std_err(&self) -> Vec<f64> {
        let c = self.count as f64;
        self.m2.iter().map(|s| (s / (c - 1.0) / c).sqrt()).collect()
    }

    /// Largest `|mean - target| / se` over coordinates; zero-variance
    /// coordinates must match exactly.
    pub fn max_z(&self, target: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(self.std_err())
            .zip(target)
            .map(|((m, se), t)| {
                let d = (m - t).abs();
                if se > 0.0 {
                    d / se
                } else if d < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}
