//! Multi-agent newsvendor game.
//!
//! `N` vendors each pick a period `a_i ∈ {0, .., N-1}` in which to supply. In
//! period `t` the agents with `a_i = t mod N` sell; every agent receives the
//! same reward, penalizing a mismatch between supplied and demanded volume and
//! the total inventory carried.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::{check_joint_action, MarkovGame};
use crate::policy::{policy_probs, ParamSet, PolicyKind};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct NewsvendorConfig {
    pub n_agents: usize,
    pub demand: f64,
    pub cost_opportunity: f64,
    pub cost_storage: f64,
    pub discount: f64,
    pub initial_inventory: f64,
}

impl Default for NewsvendorConfig {
    fn default() -> Self {
        NewsvendorConfig {
            n_agents: 5,
            demand: 1.0,
            cost_opportunity: 0.3,
            cost_storage: 0.1,
            discount: 0.95,
            initial_inventory: 1.0,
        }
    }
}

impl NewsvendorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_agents < 2 {
            return bad(format!("env.n_agents must be >= 2, got {}", self.n_agents));
        }
        if !(self.demand > 0.0 && self.demand.is_finite()) {
            return bad(format!("env.demand must be positive, got {}", self.demand));
        }
        if !(self.cost_opportunity >= 0.0 && self.cost_opportunity.is_finite()) {
            return bad(format!(
                "env.cost_opportunity must be >= 0, got {}",
                self.cost_opportunity
            ));
        }
        if !(self.cost_storage >= 0.0 && self.cost_storage.is_finite()) {
            return bad(format!(
                "env.cost_storage must be >= 0, got {}",
                self.cost_storage
            ));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!(
                "env.discount must lie in (0, 1), got {}",
                self.discount
            ));
        }
        if !(self.initial_inventory >= 0.0 && self.initial_inventory.is_finite()) {
            return bad(format!(
                "env.initial_inventory must be >= 0, got {}",
                self.initial_inventory
            ));
        }
        Ok(())
    }
}

/// Joint inventory plus the current period `t mod N`.
#[derive(Clone, Debug, PartialEq)]
pub struct InventoryState {
    pub inventories: Vec<f64>,
    pub period: usize,
}

impl InventoryState {
    pub fn total(&self) -> f64 {
        self.inventories.iter().sum()
    }
}

fn sellers(state: &InventoryState, joint_action: &[usize]) -> usize {
    joint_action.iter().filter(|&&a| a == state.period).count()
}

/// Common reward `-c_o/N |M D - D| - c_s/N Σ s_n` with `M` the number of sellers.
pub fn nv_reward(state: &InventoryState, joint_action: &[usize], cfg: &NewsvendorConfig) -> Vec<f64> {
    vec![reward_value(state, joint_action, cfg); cfg.n_agents]
}

fn reward_value(state: &InventoryState, joint_action: &[usize], cfg: &NewsvendorConfig) -> f64 {
    let n = cfg.n_agents as f64;
    let m = sellers(state, joint_action) as f64;
    let mismatch = (m * cfg.demand - cfg.demand).abs();
    -cfg.cost_opportunity / n * mismatch - cfg.cost_storage / n * state.total()
}

/// Sellers restock to at least `D` and split the demand equally; everyone else keeps their stock.
pub fn nv_transition(
    state: &InventoryState,
    joint_action: &[usize],
    cfg: &NewsvendorConfig,
) -> InventoryState {
    let m = sellers(state, joint_action);
    let inventories = state
        .inventories
        .iter()
        .zip(joint_action)
        .map(|(&s, &a)| {
            if a == state.period {
                cfg.demand.max(s) - cfg.demand / m as f64
            } else {
                s
            }
        })
        .collect();
    InventoryState {
        inventories,
        period: (state.period + 1) % cfg.n_agents,
    }
}

#[derive(Clone, Debug)]
pub struct Newsvendor {
    cfg: NewsvendorConfig,
}

impl Newsvendor {
    pub fn new(cfg: NewsvendorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Newsvendor { cfg })
    }

    pub fn config(&self) -> &NewsvendorConfig {
        &self.cfg
    }

    pub fn initial(&self) -> InventoryState {
        InventoryState {
            inventories: vec![self.cfg.initial_inventory; self.cfg.n_agents],
            period: 0,
        }
    }
}

impl MarkovGame for Newsvendor {
    type State = InventoryState;

    fn num_agents(&self) -> usize {
        self.cfg.n_agents
    }

    fn num_actions(&self) -> usize {
        self.cfg.n_agents
    }

    fn discount(&self) -> f64 {
        self.cfg.discount
    }

    /// Every inventory stays below `max{D, s0}`, and at most `N - 1` extra sellers show up.
    fn reward_bound(&self) -> f64 {
        let c = &self.cfg;
        let n = c.n_agents as f64;
        c.cost_opportunity / n * ((n - 1.0) * c.demand).max(c.demand)
            + c.cost_storage * c.demand.max(c.initial_inventory)
    }

    fn initial_state(&self, _rng: &mut RngStream) -> InventoryState {
        self.initial()
    }

    fn rewards(&self, state: &InventoryState, joint_action: &[usize], out: &mut [f64]) {
        out.fill(reward_value(state, joint_action, &self.cfg));
    }

    fn transition(
        &self,
        state: &InventoryState,
        joint_action: &[usize],
        _rng: &mut RngStream,
    ) -> InventoryState {
        nv_transition(state, joint_action, &self.cfg)
    }

    fn agent_feature(&self, state: &InventoryState, agent: usize) -> f64 {
        state.inventories[agent]
    }
}

/// Default cap on the number of reachable states explored by [`nv_exact_value`].
pub const DEFAULT_STATE_CAP: usize = 200_000;

fn state_key(s: &InventoryState) -> (usize, Vec<u64>) {
    (s.period, s.inventories.iter().map(|x| x.to_bits()).collect())
}

/// Per-agent discounted value of the initial state under a fixed stationary joint policy.
///
/// `policy(state)` returns one probability vector per agent. The reachable
/// inventory set is enumerated exactly from `s0`, then values are obtained by
/// synchronous value iteration until two sweeps differ by less than `tol`.
pub fn nv_exact_value<F>(cfg: &NewsvendorConfig, policy: F, tol: f64, cap: usize) -> Result<Vec<f64>>
where
    F: Fn(&InventoryState) -> Vec<Vec<f64>>,
{
    let game = Newsvendor::new(cfg.clone())?;
    let n = cfg.n_agents;
    let k = game.num_actions();
    let joint_count = k.pow(n as u32);

    let mut index: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut states = vec![game.initial()];
    index.insert(state_key(&states[0]), 0);
    // (probability, per-agent rewards, successor) per state
    let mut edges: Vec<Vec<(f64, Vec<f64>, usize)>> = Vec::new();
    let mut joint = vec![0usize; n];
    let mut cursor = 0;
    while cursor < states.len() {
        let s = states[cursor].clone();
        let probs = policy(&s);
        let mut out = Vec::new();
        for code in 0..joint_count {
            let mut c = code;
            let mut p = 1.0;
            for (i, a) in joint.iter_mut().enumerate() {
                *a = c % k;
                c /= k;
                p *= probs[i][*a];
            }
            check_joint_action(&game, &joint);
            let next = nv_transition(&s, &joint, cfg);
            let key = state_key(&next);
            let idx = match index.get(&key) {
                Some(&idx) => idx,
                None => {
                    if states.len() >= cap {
                        return Err(Error::ReachableSetTooLarge { cap });
                    }
                    states.push(next);
                    index.insert(key, states.len() - 1);
                    states.len() - 1
                }
            };
            if p > 0.0 {
                out.push((p, nv_reward(&s, &joint, cfg), idx));
            }
        }
        edges.push(out);
        cursor += 1;
    }

    let gamma = cfg.discount;
    let values = (0..n)
        .map(|agent| {
            let mut v = vec![0.0; states.len()];
            loop {
                let next: Vec<f64> = edges
                    .iter()
                    .map(|es| es.iter().map(|(p, r, j)| p * (r[agent] + gamma * v[*j])).sum())
                    .collect();
                let diff = next
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                v = next;
                if diff < tol {
                    return v[0];
                }
            }
        })
        .collect();
    Ok(values)
}

/// [`nv_exact_value`] for softmax policies given by a full parameter set.
pub fn nv_exact_value_for_params(
    cfg: &NewsvendorConfig,
    params: &ParamSet,
    kind: PolicyKind,
    tol: f64,
) -> Result<Vec<f64>> {
    nv_exact_value(
        cfg,
        |s| {
            (0..cfg.n_agents)
                .map(|i| policy_probs(i, &s.inventories, params, kind))
                .collect()
        },
        tol,
        DEFAULT_STATE_CAP,
    )
}
