//! Small games with closed-form or enumerable values.
//!
//! These serve as oracles for the estimators and as compact demos; the
//! newsvendor is the benchmark.

use crate::error::{Error, Result};
use crate::game::MarkovGame;
use crate::rng::RngStream;

/// Encodes a joint action as `Σ a_i K^i`.
pub fn joint_index(joint_action: &[usize], num_actions: usize) -> usize {
    joint_action
        .iter()
        .rev()
        .fold(0, |acc, &a| acc * num_actions + a)
}

/// Decodes [`joint_index`].
pub fn joint_from_index(mut code: usize, num_agents: usize, num_actions: usize) -> Vec<usize> {
    (0..num_agents)
        .map(|_| {
            let a = code % num_actions;
            code /= num_actions;
            a
        })
        .collect()
}

/// Single-state repeated game with deterministic rewards per joint action.
///
/// Every agent sees the same constant policy feature.
#[derive(Clone, Debug)]
pub struct MatrixBandit {
    num_agents: usize,
    num_actions: usize,
    discount: f64,
    feature: f64,
    /// `rewards[joint_index][agent]`
    rewards: Vec<Vec<f64>>,
}

impl MatrixBandit {
    pub fn new(
        num_agents: usize,
        num_actions: usize,
        discount: f64,
        feature: f64,
        rewards: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let joint = num_actions.pow(num_agents as u32);
        if rewards.len() != joint || rewards.iter().any(|r| r.len() != num_agents) {
            return Err(Error::InvalidGame(format!(
                "reward table must be {joint} x {num_agents}"
            )));
        }
        let game = MatrixBandit {
            num_agents,
            num_actions,
            discount,
            feature,
            rewards,
        };
        crate::game::validate_game(&game)?;
        Ok(game)
    }

    /// Every agent receives `reward(joint_action)`.
    pub fn common<F: Fn(&[usize]) -> f64>(
        num_agents: usize,
        num_actions: usize,
        discount: f64,
        feature: f64,
        reward: F,
    ) -> Result<Self> {
        let joint = num_actions.pow(num_agents as u32);
        let rewards = (0..joint)
            .map(|c| vec![reward(&joint_from_index(c, num_agents, num_actions)); num_agents])
            .collect();
        MatrixBandit::new(num_agents, num_actions, discount, feature, rewards)
    }

    pub fn reward_of(&self, joint_action: &[usize]) -> &[f64] {
        &self.rewards[joint_index(joint_action, self.num_actions)]
    }

    pub fn feature(&self) -> f64 {
        self.feature
    }
}

impl MarkovGame for MatrixBandit {
    type State = ();

    fn num_agents(&self) -> usize {
        self.num_agents
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn reward_bound(&self) -> f64 {
        self.rewards
            .iter()
            .flatten()
            .fold(0.0, |m, r| f64::max(m, r.abs()))
    }

    fn initial_state(&self, _rng: &mut RngStream) {}

    fn rewards(&self, _state: &(), joint_action: &[usize], out: &mut [f64]) {
        out.copy_from_slice(self.reward_of(joint_action));
    }

    fn transition(&self, _state: &(), _joint_action: &[usize], _rng: &mut RngStream) {}

    fn agent_feature(&self, _state: &(), _agent: usize) -> f64 {
        self.feature
    }
}

/// Two-state game with action-dependent stochastic transitions.
///
/// States are `0` and `1`; the policy feature of every agent is the state index.
#[derive(Clone, Debug)]
pub struct TwoStateChain {
    num_agents: usize,
    num_actions: usize,
    discount: f64,
    /// Probability of starting in state 1.
    start_in_one: f64,
    /// `to_one[state][joint_index]`: probability the next state is 1.
    to_one: [Vec<f64>; 2],
    /// `rewards[state][joint_index][agent]`
    rewards: [Vec<Vec<f64>>; 2],
}

impl TwoStateChain {
    pub fn new(
        num_agents: usize,
        num_actions: usize,
        discount: f64,
        start_in_one: f64,
        to_one: [Vec<f64>; 2],
        rewards: [Vec<Vec<f64>>; 2],
    ) -> Result<Self> {
        let joint = num_actions.pow(num_agents as u32);
        let shapes_ok = to_one.iter().all(|p| p.len() == joint)
            && rewards
                .iter()
                .all(|r| r.len() == joint && r.iter().all(|x| x.len() == num_agents));
        if !shapes_ok {
            return Err(Error::InvalidGame("transition/reward table shape".into()));
        }
        let probs_ok = to_one.iter().flatten().chain([&start_in_one]).all(|p| (0.0..=1.0).contains(p));
        if !probs_ok {
            return Err(Error::InvalidGame("probabilities must lie in [0, 1]".into()));
        }
        let game = TwoStateChain {
            num_agents,
            num_actions,
            discount,
            start_in_one,
            to_one,
            rewards,
        };
        crate::game::validate_game(&game)?;
        Ok(game)
    }

    /// A fixed 2-agent, 2-action instance with non-trivial dynamics and
    /// distinct per-agent rewards.
    pub fn demo(discount: f64) -> Self {
        // joint index = a_0 + 2 a_1
        let to_one = [vec![0.2, 0.7, 0.5, 0.9], vec![0.6, 0.3, 0.8, 0.1]];
        let rewards = [
            vec![vec![1.0, 0.0], vec![0.0, 0.5], vec![-0.5, 1.0], vec![0.3, -0.2]],
            vec![vec![-1.0, 0.4], vec![0.8, 0.8], vec![0.2, -0.6], vec![0.0, 1.0]],
        ];
        TwoStateChain::new(2, 2, discount, 0.3, to_one, rewards).expect("demo chain is valid")
    }

    pub fn start_in_one(&self) -> f64 {
        self.start_in_one
    }

    pub fn prob_to_one(&self, state: usize, joint_action: &[usize]) -> f64 {
        self.to_one[state][joint_index(joint_action, self.num_actions)]
    }

    pub fn reward_of(&self, state: usize, joint_action: &[usize]) -> &[f64] {
        &self.rewards[state][joint_index(joint_action, self.num_actions)]
    }
}

impl MarkovGame for TwoStateChain {
    type State = usize;

    fn num_agents(&self) -> usize {
        self.num_agents
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn reward_bound(&self) -> f64 {
        self.rewards
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m, r| f64::max(m, r.abs()))
    }

    fn initial_state(&self, rng: &mut RngStream) -> usize {
        usize::from(rng.uniform() < self.start_in_one)
    }

    fn rewards(&self, state: &usize, joint_action: &[usize], out: &mut [f64]) {
        out.copy_from_slice(self.reward_of(*state, joint_action));
    }

    fn transition(&self, state: &usize, joint_action: &[usize], rng: &mut RngStream) -> usize {
        usize::from(rng.uniform() < self.prob_to_one(*state, joint_action))
    }

    fn agent_feature(&self, state: &usize, _agent: usize) -> f64 {
        *state as f64
    }
}
