//! Softmax policies with optional mellow-max coupling across agents.
//!
//! Agent `i` with parameter rows `(θ_i(k,1), θ_i(k,2))` scores action `k` with
//! the logit
//!
//! ```text
//! z_i(k) = θ_i(k,1) + θ_i(k,2) s_i - mmax_{j != i} { θ_j(k,1) + θ_j(k,2) s_j }
//! ```
//!
//! where `mmax` is log-mean-exp. The independent variant drops the coupling
//! term. Everything here is evaluated against a *view* of the joint parameters,
//! which during training is the agent's belief table row.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Networked (coupled) or independent softmax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Networked,
    Independent,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Networked => "networked",
            PolicyKind::Independent => "independent",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "networked" => Ok(PolicyKind::Networked),
            "independent" => Ok(PolicyKind::Independent),
            other => Err(format!(
                "unknown policy kind `{other}` (expected networked or independent)"
            )),
        }
    }
}

/// One agent's `K x 2` parameter table, stored row-major as `[θ(k,1), θ(k,2)]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentParams {
    values: Vec<f64>,
}

impl AgentParams {
    pub fn zeros(num_actions: usize) -> Self {
        AgentParams {
            values: vec![0.0; 2 * num_actions],
        }
    }

    /// Builds from `(intercept, state coefficient)` rows.
    pub fn from_rows(rows: &[[f64; 2]]) -> Self {
        AgentParams {
            values: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.values.len() / 2
    }

    /// Dimension `M_i = 2K`.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn intercept(&self, k: usize) -> f64 {
        self.values[2 * k]
    }

    #[inline]
    pub fn slope(&self, k: usize) -> f64 {
        self.values[2 * k + 1]
    }

    #[inline]
    pub fn affine(&self, k: usize, feature: f64) -> f64 {
        self.values[2 * k] + self.values[2 * k + 1] * feature
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn distance(&self, other: &AgentParams) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Joint parameters `θ = (θ_1, .., θ_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    agents: Vec<AgentParams>,
}

impl ParamSet {
    pub fn new(agents: Vec<AgentParams>) -> Self {
        assert!(!agents.is_empty(), "parameter set needs at least one agent");
        let k = agents[0].num_actions();
        assert!(
            agents.iter().all(|a| a.num_actions() == k),
            "all agents must share the action count"
        );
        ParamSet { agents }
    }

    pub fn zeros(num_agents: usize, num_actions: usize) -> Self {
        ParamSet::new(vec![AgentParams::zeros(num_actions); num_agents])
    }

    /// Entries i.i.d. `N(0, std^2)`.
    pub fn random_normal(num_agents: usize, num_actions: usize, std: f64, rng: &mut RngStream) -> Self {
        let agents = (0..num_agents)
            .map(|_| {
                let mut p = AgentParams::zeros(num_actions);
                for x in p.as_mut_slice() {
                    *x = std * rng.normal();
                }
                p
            })
            .collect();
        ParamSet::new(agents)
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.agents[0].num_actions()
    }

    /// Total dimension `M = Σ M_i`.
    pub fn dim(&self) -> usize {
        self.agents.iter().map(AgentParams::dim).sum()
    }

    pub fn agent(&self, i: usize) -> &AgentParams {
        &self.agents[i]
    }

    pub fn agent_mut(&mut self, i: usize) -> &mut AgentParams {
        &mut self.agents[i]
    }

    pub fn agents(&self) -> &[AgentParams] {
        &self.agents
    }

    pub fn is_finite(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.as_slice().iter().all(|x| x.is_finite()))
    }
}

/// Log-mean-exp `log((1/m) Σ exp(x_j))`, shifted by the maximum for overflow safety.
pub fn mellow_max(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("mellow-max of an empty set".into()));
    }
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = values.iter().map(|x| (x - m).exp()).sum();
    Ok(m + (s / values.len() as f64).ln())
}

/// Mellow-max over `x_j(k) = θ_j(k,1) + θ_j(k,2) s_j` for all `j != excluded`.
#[inline]
fn coupling(view: &ParamSet, features: &[f64], excluded: usize, k: usize) -> f64 {
    let n = view.num_agents();
    let mut m = f64::NEG_INFINITY;
    for j in (0..n).filter(|&j| j != excluded) {
        m = m.max(view.agents[j].affine(k, features[j]));
    }
    let mut s = 0.0;
    for j in (0..n).filter(|&j| j != excluded) {
        s += (view.agents[j].affine(k, features[j]) - m).exp();
    }
    m + (s / (n - 1) as f64).ln()
}

/// Writes the logits `z_i(k)` of agent `agent` into `out`.
pub fn logits_into(
    agent: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
    out: &mut [f64],
) {
    let own = &view.agents[agent];
    let s = features[agent];
    let coupled = kind == PolicyKind::Networked && view.num_agents() > 1;
    for (k, z) in out.iter_mut().enumerate() {
        *z = own.affine(k, s);
        if coupled {
            *z -= coupling(view, features, agent, k);
        }
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in z.iter_mut() {
        *x = (*x - m).exp();
        total += *x;
    }
    for x in z.iter_mut() {
        *x /= total;
    }
}

/// Action probabilities of `agent` under `view`, written into `out` (length `K`).
pub fn policy_probs_into(
    agent: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
    out: &mut [f64],
) {
    logits_into(agent, features, view, kind, out);
    softmax_in_place(out);
}

pub fn policy_probs(agent: usize, features: &[f64], view: &ParamSet, kind: PolicyKind) -> Vec<f64> {
    let mut out = vec![0.0; view.num_actions()];
    policy_probs_into(agent, features, view, kind, &mut out);
    out
}

/// Samples one action by inverse CDF; `scratch` must have length `K`.
pub fn sample_action_with(
    agent: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
    stream: &mut RngStream,
    scratch: &mut [f64],
) -> usize {
    policy_probs_into(agent, features, view, kind, scratch);
    stream.categorical(scratch)
}

pub fn sample_action(
    agent: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
    stream: &mut RngStream,
) -> usize {
    let mut scratch = vec![0.0; view.num_actions()];
    sample_action_with(agent, features, view, kind, stream, &mut scratch)
}

/// Adds `scale * ∇_{θ_i} log π_n(a_n | s)` to `out` (length `2K`).
///
/// `probs_n` must hold `π_n(· | s)` under the same view.
fn add_score(
    i: usize,
    n: usize,
    a_n: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
    probs_n: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    let s_i = features[i];
    if n == i {
        for (k, &p) in probs_n.iter().enumerate() {
            let c = scale * (f64::from(u8::from(k == a_n)) - p);
            out[2 * k] += c;
            out[2 * k + 1] += c * s_i;
        }
        return;
    }
    if kind == PolicyKind::Independent {
        return;
    }
    // z_n(k) depends on θ_i only through the mellow-max over j != n, with
    // ∂z_n(k)/∂x_i(k) = -softmax_{j != n}(x_j(k))_i
    let agents = view.num_agents();
    for (k, &p) in probs_n.iter().enumerate() {
        let c = scale * (f64::from(u8::from(k == a_n)) - p);
        let mut m = f64::NEG_INFINITY;
        for j in (0..agents).filter(|&j| j != n) {
            m = m.max(view.agents[j].affine(k, features[j]));
        }
        let mut total = 0.0;
        for j in (0..agents).filter(|&j| j != n) {
            total += (view.agents[j].affine(k, features[j]) - m).exp();
        }
        let w = (view.agents[i].affine(k, s_i) - m).exp() / total;
        out[2 * k] -= c * w;
        out[2 * k + 1] -= c * w * s_i;
    }
}

/// `∇_{θ_i} log π_n(a_n | s)` under `view`, a vector of length `2K`.
pub fn score_function(
    i: usize,
    n: usize,
    a_n: usize,
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
) -> Vec<f64> {
    let probs = policy_probs(n, features, view, kind);
    let mut out = vec![0.0; 2 * view.num_actions()];
    add_score(i, n, a_n, features, view, kind, &probs, 1.0, &mut out);
    out
}

/// `Σ_n ∇_{θ_i} log π_n(a_n | s)` for a joint action, all policies evaluated under `view`.
pub fn joint_score(
    i: usize,
    joint_action: &[usize],
    features: &[f64],
    view: &ParamSet,
    kind: PolicyKind,
) -> Vec<f64> {
    let k = view.num_actions();
    let mut out = vec![0.0; 2 * k];
    let mut probs = vec![0.0; k];
    for (n, &a_n) in joint_action.iter().enumerate() {
        if n != i && kind == PolicyKind::Independent {
            continue;
        }
        policy_probs_into(n, features, view, kind, &mut probs);
        add_score(i, n, a_n, features, view, kind, &probs, 1.0, &mut out);
    }
    out
}
