//! Episodic stochastic policy-gradient estimation.
//!
//! One estimate plays a joint episode of geometric length `T1 ~ Geom(1-γ)`
//! to sample `(s_T1, a_T1)`, then estimates the reward term from rollouts of
//! length `Geom(1-√γ)` weighted by `γ^{τ/2}`. Agent `i` returns
//! `R̂_i Σ_n ∇_i log π_n(a_n | s_T1)`. The `1/(1-γ)` factor of the exact
//! gradient is absorbed by sampling `T1` from the discounted occupancy.
//!
//! All agents act in the same episode. Each one samples its own action from
//! its own view of the joint parameters, and all of them consume the same
//! horizon draws.

use crate::error::Result;
use crate::game::{check_joint_action, MarkovGame};
use crate::policy::{joint_score, sample_action_with, ParamSet, PolicyKind};
use crate::rng::{RngStream, StreamId};

/// Which reward estimate multiplies the score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// `R̂ = Q̂(s, a)`
    Q,
    /// `R̂ = Q̂(s, a) - V̂(s)` with an independent value rollout.
    Advantage,
    /// `R̂ = r(s, a) + γ V̂(s') - V̂(s)`
    Td,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Q => "q",
            EstimatorKind::Advantage => "advantage",
            EstimatorKind::Td => "td",
        }
    }

    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Q, EstimatorKind::Advantage, EstimatorKind::Td];
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "q" => Ok(EstimatorKind::Q),
            "advantage" | "adv" => Ok(EstimatorKind::Advantage),
            "td" => Ok(EstimatorKind::Td),
            other => Err(format!(
                "unknown estimator `{other}` (expected q, advantage or td)"
            )),
        }
    }
}

/// The random streams one estimate draws from.
#[derive(Clone, Debug)]
pub struct EpisodeStreams {
    /// Shared by all agents.
    pub horizon: RngStream,
    pub env: RngStream,
    pub actions: Vec<RngStream>,
}

impl EpisodeStreams {
    pub fn new(seed: u64, num_agents: usize) -> Self {
        EpisodeStreams {
            horizon: RngStream::new(seed, StreamId::Horizon),
            env: RngStream::new(seed, StreamId::Environment),
            actions: (0..num_agents)
                .map(|i| RngStream::new(seed, StreamId::Action(i)))
                .collect(),
        }
    }

    /// Streams for iteration `iteration` of the run seeded with `master`.
    pub fn for_iteration(master: u64, iteration: u64, num_agents: usize) -> Self {
        EpisodeStreams::new(crate::rng::derive_seed(master, &[iteration]), num_agents)
    }
}

/// Horizon draws consumed by one estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizons {
    pub t1: u64,
    /// Length of the `Q̂` rollout.
    pub t2: u64,
    /// Length of the `V̂(s_T1)` rollout (advantage and TD).
    pub t2_value: Option<u64>,
    /// Length of the `V̂(s_T1+1)` rollout (TD).
    pub t2_next: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    /// Agent `i`'s stochastic gradient, length `2K`.
    pub per_agent: Vec<Vec<f64>>,
    /// Reward estimate `R̂_i` used in the gradient.
    pub rhat: Vec<f64>,
    /// Discounted return estimate `Q̂_i(s_T1, a_T1)`, reported for every estimator kind.
    pub qhat: Vec<f64>,
    pub horizons: Horizons,
}

/// Joint-episode driver with reusable buffers.
struct Rollout<'a, G: MarkovGame> {
    game: &'a G,
    views: &'a [ParamSet],
    kind: PolicyKind,
    features: Vec<f64>,
    scratch: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
}

impl<'a, G: MarkovGame> Rollout<'a, G> {
    fn new(game: &'a G, views: &'a [ParamSet], kind: PolicyKind) -> Self {
        let n = game.num_agents();
        assert_eq!(views.len(), n, "one parameter view per agent");
        Rollout {
            game,
            views,
            kind,
            features: vec![0.0; n],
            scratch: vec![0.0; game.num_actions()],
            actions: vec![0; n],
            rewards: vec![0.0; n],
        }
    }

    /// Each agent samples from its own view; the result lands in `self.actions`.
    fn sample_joint(&mut self, state: &G::State, streams: &mut EpisodeStreams) {
        self.game.features(state, &mut self.features);
        for i in 0..self.actions.len() {
            self.actions[i] = sample_action_with(
                i,
                &self.features,
                &self.views[i],
                self.kind,
                &mut streams.actions[i],
                &mut self.scratch,
            );
        }
    }

    fn phase1(&mut self, t1: u64, streams: &mut EpisodeStreams) -> (G::State, Vec<usize>) {
        let mut state = self.game.initial_state(&mut streams.env);
        self.sample_joint(&state, streams);
        for _ in 0..t1 {
            state = self.game.transition(&state, &self.actions, &mut streams.env);
            self.sample_joint(&state, streams);
        }
        (state, self.actions.clone())
    }

    /// `Σ_{τ=0}^{horizon} γ^{τ/2} r(s_τ, a_τ)` starting from `(state, action)`,
    /// or from a freshly sampled action when `action` is `None`.
    fn discounted_sum(
        &mut self,
        state: &G::State,
        action: Option<&[usize]>,
        horizon: u64,
        streams: &mut EpisodeStreams,
        out: &mut [f64],
    ) {
        let root_gamma = self.game.discount().sqrt();
        match action {
            Some(a) => {
                check_joint_action(self.game, a);
                self.actions.copy_from_slice(a);
            }
            None => self.sample_joint(state, streams),
        }
        out.fill(0.0);
        let mut weight = 1.0;
        let mut state = state.clone();
        for tau in 0..=horizon {
            if tau > 0 {
                state = self.game.transition(&state, &self.actions, &mut streams.env);
                self.sample_joint(&state, streams);
                weight *= root_gamma;
            }
            self.game.rewards(&state, &self.actions, &mut self.rewards);
            for (o, r) in out.iter_mut().zip(&self.rewards) {
                *o += weight * r;
            }
        }
    }
}

fn draw_t1(streams: &mut EpisodeStreams, gamma: f64) -> Result<u64> {
    streams.horizon.geometric(1.0 - gamma)
}

fn draw_t2(streams: &mut EpisodeStreams, gamma: f64) -> Result<u64> {
    streams.horizon.geometric(1.0 - gamma.sqrt())
}

/// Resets, plays `t1` steps and returns the state and joint action at time `t1`.
pub fn rollout_phase1<G: MarkovGame>(
    game: &G,
    views: &[ParamSet],
    kind: PolicyKind,
    t1: u64,
    streams: &mut EpisodeStreams,
) -> (G::State, Vec<usize>) {
    Rollout::new(game, views, kind).phase1(t1, streams)
}

/// `Q̂_i(s, a) = Σ_{τ=0}^{t2} γ^{τ/2} r_i(s_τ, a_τ)` with `(s_0, a_0) = (s, a)`.
pub fn estimate_q<G: MarkovGame>(
    game: &G,
    views: &[ParamSet],
    kind: PolicyKind,
    state: &G::State,
    joint_action: &[usize],
    t2: u64,
    streams: &mut EpisodeStreams,
) -> Vec<f64> {
    let mut out = vec![0.0; game.num_agents()];
    Rollout::new(game, views, kind).discounted_sum(state, Some(joint_action), t2, streams, &mut out);
    out
}

/// `V̂_i(s)`: like [`estimate_q`] but the first joint action is freshly sampled at `s`.
pub fn estimate_v<G: MarkovGame>(
    game: &G,
    views: &[ParamSet],
    kind: PolicyKind,
    state: &G::State,
    t2: u64,
    streams: &mut EpisodeStreams,
) -> Vec<f64> {
    let mut out = vec![0.0; game.num_agents()];
    Rollout::new(game, views, kind).discounted_sum(state, None, t2, streams, &mut out);
    out
}

/// One stochastic gradient per agent from a shared joint episode.
///
/// Horizon draws come from `streams.horizon` in the fixed order `T1`, `T2`,
/// then the value-rollout horizons the estimator needs.
pub fn estimate_gradient<G: MarkovGame>(
    game: &G,
    views: &[ParamSet],
    kind: PolicyKind,
    estimator: EstimatorKind,
    streams: &mut EpisodeStreams,
) -> Result<GradientEstimate> {
    let gamma = game.discount();
    let n = game.num_agents();
    let mut rollout = Rollout::new(game, views, kind);

    let t1 = draw_t1(streams, gamma)?;
    let (state, action) = rollout.phase1(t1, streams);

    let t2 = draw_t2(streams, gamma)?;
    let mut qhat = vec![0.0; n];
    rollout.discounted_sum(&state, Some(&action), t2, streams, &mut qhat);

    let mut horizons = Horizons {
        t1,
        t2,
        t2_value: None,
        t2_next: None,
    };
    let rhat = match estimator {
        EstimatorKind::Q => qhat.clone(),
        EstimatorKind::Advantage => {
            let tv = draw_t2(streams, gamma)?;
            horizons.t2_value = Some(tv);
            let mut v = vec![0.0; n];
            rollout.discounted_sum(&state, None, tv, streams, &mut v);
            qhat.iter().zip(&v).map(|(q, v)| q - v).collect()
        }
        EstimatorKind::Td => {
            let tv = draw_t2(streams, gamma)?;
            let tn = draw_t2(streams, gamma)?;
            horizons.t2_value = Some(tv);
            horizons.t2_next = Some(tn);
            let mut reward = vec![0.0; n];
            game.rewards(&state, &action, &mut reward);
            let next = game.transition(&state, &action, &mut streams.env);
            let mut v = vec![0.0; n];
            let mut v_next = vec![0.0; n];
            rollout.discounted_sum(&state, None, tv, streams, &mut v);
            rollout.discounted_sum(&next, None, tn, streams, &mut v_next);
            (0..n).map(|i| reward[i] + gamma * v_next[i] - v[i]).collect()
        }
    };

    let mut features = vec![0.0; n];
    game.features(&state, &mut features);
    let per_agent = (0..n)
        .map(|i| {
            let mut g = joint_score(i, &action, &features, &views[i], kind);
            for x in &mut g {
                *x *= rhat[i];
            }
            g
        })
        .collect();

    Ok(GradientEstimate {
        per_agent,
        rhat,
        qhat,
        horizons,
    })
}
