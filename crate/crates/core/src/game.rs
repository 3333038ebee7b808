//! Markov-game environment contract and a stepping simulator on top of it.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A finite-agent Markov game with a common discrete action count.
///
/// Rewards are evaluated at the pre-transition state: stepping from `s_t` with
/// joint action `a_t` yields `r(s_t, a_t)` and moves to `s_{t+1}`.
pub trait MarkovGame: Sync {
    type State: Clone + Debug + Send + Sync;

    fn num_agents(&self) -> usize;

    fn num_actions(&self) -> usize;

    fn discount(&self) -> f64;

    /// Declared bound `R` on `|r_i(s, a)|`.
    fn reward_bound(&self) -> f64;

    /// Draws a state from the initial distribution.
    fn initial_state(&self, rng: &mut RngStream) -> Self::State;

    /// Writes `r_i(state, joint_action)` for every agent into `out`.
    fn rewards(&self, state: &Self::State, joint_action: &[usize], out: &mut [f64]);

    fn transition(
        &self,
        state: &Self::State,
        joint_action: &[usize],
        rng: &mut RngStream,
    ) -> Self::State;

    /// Scalar state feature agent `agent` feeds into its policy.
    fn agent_feature(&self, state: &Self::State, agent: usize) -> f64;

    fn features(&self, state: &Self::State, out: &mut [f64]) {
        for (i, f) in out.iter_mut().enumerate() {
            *f = self.agent_feature(state, i);
        }
    }
}

/// Checks the structural invariants every game must satisfy.
pub fn validate_game<G: MarkovGame + ?Sized>(game: &G) -> Result<()> {
    let gamma = game.discount();
    if game.num_agents() < 2 {
        return Err(Error::InvalidGame(format!(
            "need at least 2 agents, got {}",
            game.num_agents()
        )));
    }
    if game.num_actions() < 1 {
        return Err(Error::InvalidGame("need at least one action".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGame(format!(
            "discount {gamma} must lie strictly inside (0, 1)"
        )));
    }
    Ok(())
}

/// Owns the evolving state and period clock of one game instance.
#[derive(Debug)]
pub struct Simulator<'g, G: MarkovGame> {
    game: &'g G,
    state: G::State,
    clock: u64,
}

impl<'g, G: MarkovGame> Simulator<'g, G> {
    pub fn new(game: &'g G, rng: &mut RngStream) -> Self {
        let state = game.initial_state(rng);
        Simulator {
            game,
            state,
            clock: 0,
        }
    }

    pub fn game(&self) -> &'g G {
        self.game
    }

    pub fn state(&self) -> &G::State {
        &self.state
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn reset(&mut self, rng: &mut RngStream) -> &G::State {
        self.state = self.game.initial_state(rng);
        self.clock = 0;
        &self.state
    }

    /// Re-seats the simulator at an arbitrary state (used for value rollouts).
    pub fn seat(&mut self, state: G::State) {
        self.state = state;
    }

    /// Applies `joint_action`, writing rewards into `rewards` and advancing the clock.
    ///
    /// # Panics
    /// On a joint action of the wrong length or with an out-of-range index.
    pub fn step_into(&mut self, joint_action: &[usize], rng: &mut RngStream, rewards: &mut [f64]) {
        check_joint_action(self.game, joint_action);
        self.game.rewards(&self.state, joint_action, rewards);
        self.state = self.game.transition(&self.state, joint_action, rng);
        self.clock += 1;
    }

    pub fn step(&mut self, joint_action: &[usize], rng: &mut RngStream) -> (G::State, Vec<f64>) {
        let mut rewards = vec![0.0; self.game.num_agents()];
        self.step_into(joint_action, rng, &mut rewards);
        (self.state.clone(), rewards)
    }
}

pub(crate) fn check_joint_action<G: MarkovGame + ?Sized>(game: &G, joint_action: &[usize]) {
    assert_eq!(
        joint_action.len(),
        game.num_agents(),
        "joint action has {} entries for {} agents",
        joint_action.len(),
        game.num_agents()
    );
    let k = game.num_actions();
    if let Some(a) = joint_action.iter().find(|&&a| a >= k) {
        panic!("action index {a} out of range for {k} actions");
    }
}
