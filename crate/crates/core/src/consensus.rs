//! Communication schedules and belief consensus.
//!
//! Every agent `i` keeps a copy `θ̂^i_j` of every agent's parameters. After
//! each gradient step, source agent `j` refreshes its own copy and all agents
//! mix their copies of `θ_j` with their current neighbors through the
//! row-stochastic matrix `W_{j,t}`, whose row `j` is the unit row.

use crate::error::{Error, Result};
use crate::policy::ParamSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Complete,
    StaticStar,
    StaticRing,
    TimeVaryingStar,
    TimeVaryingRing,
    /// Beliefs are overwritten with the true parameters every iteration.
    Perfect,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Complete => "complete",
            Topology::StaticStar => "star",
            Topology::StaticRing => "ring",
            Topology::TimeVaryingStar => "tv_star",
            Topology::TimeVaryingRing => "tv_ring",
            Topology::Perfect => "perfect",
        }
    }

    pub const ALL: [Topology; 6] = [
        Topology::Complete,
        Topology::StaticStar,
        Topology::StaticRing,
        Topology::TimeVaryingStar,
        Topology::TimeVaryingRing,
        Topology::Perfect,
    ];
}

impl std::str::FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Topology::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                format!("unknown topology `{s}` (expected complete, star, ring, tv_star, tv_ring or perfect)")
            })
    }
}

/// Topology choice before the agent count is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommSpec {
    pub topology: Topology,
    /// Window length over which the edge union must be connected.
    pub period: usize,
    pub hub: usize,
}

impl Default for CommSpec {
    fn default() -> Self {
        CommSpec {
            topology: Topology::TimeVaryingStar,
            period: 5,
            hub: 0,
        }
    }
}

/// Time-indexed undirected edge sets `E_t` for `N` agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommSchedule {
    topology: Topology,
    num_agents: usize,
    period: usize,
    hub: usize,
}

impl CommSchedule {
    /// Builds the schedule and checks window-union connectivity.
    pub fn new(spec: CommSpec, num_agents: usize) -> Result<Self> {
        let schedule = CommSchedule::unchecked(spec, num_agents)?;
        if !schedule.window_union_connected() {
            return Err(Error::Disconnected {
                topology: spec.topology.name().to_string(),
                period: spec.period,
            });
        }
        Ok(schedule)
    }

    /// Builds the schedule checking only its shape, not connectivity.
    pub fn unchecked(spec: CommSpec, num_agents: usize) -> Result<Self> {
        if num_agents < 2 {
            return Err(Error::InvalidConfig(format!(
                "communication needs at least 2 agents, got {num_agents}"
            )));
        }
        if spec.period == 0 {
            return Err(Error::InvalidConfig("comm.period must be >= 1".into()));
        }
        if spec.hub >= num_agents {
            return Err(Error::InvalidConfig(format!(
                "comm.hub {} out of range for {num_agents} agents",
                spec.hub
            )));
        }
        Ok(CommSchedule {
            topology: spec.topology,
            num_agents,
            period: spec.period,
            hub: spec.hub,
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges_at(&self, t: u64) -> Vec<(usize, usize)> {
        let n = self.num_agents;
        let ordered = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut edges: Vec<(usize, usize)> = match self.topology {
            Topology::Complete | Topology::Perfect => (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect(),
            Topology::StaticStar => (0..n)
                .filter(|&j| j != self.hub)
                .map(|j| ordered(self.hub, j))
                .collect(),
            Topology::StaticRing => ring_edges(n),
            Topology::TimeVaryingStar => {
                let spokes: Vec<usize> = (0..n).filter(|&j| j != self.hub).collect();
                let spoke = spokes[(t % spokes.len() as u64) as usize];
                vec![ordered(self.hub, spoke)]
            }
            Topology::TimeVaryingRing => {
                let e = (t % n as u64) as usize;
                vec![ordered(e, (e + 1) % n)]
            }
        };
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn neighbors_at(&self, t: u64) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_agents];
        for (a, b) in self.edges_at(t) {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Whether every window `[t, t + period)` has a connected edge union.
    ///
    /// Every shipped schedule repeats with a cycle dividing `N (N - 1)`, so
    /// checking window starts over one such cycle covers all `t`.
    pub fn window_union_connected(&self) -> bool {
        let n = self.num_agents;
        let cycle = (n * (n - 1)) as u64;
        (0..cycle).all(|start| {
            let edges: Vec<(usize, usize)> = (start..start + self.period as u64)
                .flat_map(|t| self.edges_at(t))
                .collect();
            connected(n, &edges)
        })
    }

    /// Lower bound `h` on every nonzero weight of the uniform rule.
    pub fn min_weight(&self) -> f64 {
        1.0 / self.num_agents as f64
    }

    /// `W_{j,t}`: row `j` is the unit row; row `i != j` weighs `i` and its current
    /// neighbors equally by `1 / (|N_i,t| + 1)`.
    pub fn build_weights(&self, t: u64, source: usize) -> Vec<Vec<f64>> {
        let n = self.num_agents;
        let adj = self.neighbors_at(t);
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                if i == source {
                    row[i] = 1.0;
                } else {
                    let w = 1.0 / (adj[i].len() + 1) as f64;
                    row[i] = w;
                    for &l in &adj[i] {
                        row[l] = w;
                    }
                }
                row
            })
            .collect()
    }
}

fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .map(|a| {
            let b = (a + 1) % n;
            (a.min(b), a.max(b))
        })
        .collect()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// How off-diagonal beliefs start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeliefInit {
    Zero,
    Exact,
}

impl BeliefInit {
    pub fn name(self) -> &'static str {
        match self {
            BeliefInit::Zero => "zero",
            BeliefInit::Exact => "exact",
        }
    }
}

impl std::str::FromStr for BeliefInit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(BeliefInit::Zero),
            "exact" => Ok(BeliefInit::Exact),
            other => Err(format!("unknown belief init `{other}` (expected zero or exact)")),
        }
    }
}

/// `copies[i]` is agent `i`'s view of the joint parameters; `copies[i][i]` is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefTable {
    copies: Vec<ParamSet>,
}

impl BeliefTable {
    pub fn new(true_params: &ParamSet, init: BeliefInit) -> Self {
        let n = true_params.num_agents();
        let copies = (0..n)
            .map(|i| {
                let mut view = match init {
                    BeliefInit::Exact => true_params.clone(),
                    BeliefInit::Zero => ParamSet::zeros(n, true_params.num_actions()),
                };
                *view.agent_mut(i) = true_params.agent(i).clone();
                view
            })
            .collect();
        BeliefTable { copies }
    }

    /// Per-agent parameter views, indexed by the believing agent.
    pub fn views(&self) -> &[ParamSet] {
        &self.copies
    }

    pub fn view(&self, agent: usize) -> &ParamSet {
        &self.copies[agent]
    }

    pub fn view_mut(&mut self, agent: usize) -> &mut ParamSet {
        &mut self.copies[agent]
    }

    pub fn num_agents(&self) -> usize {
        self.copies.len()
    }

    /// One consensus exchange at time `t` with freshly updated `true_params`.
    pub fn consensus_step(&mut self, true_params: &ParamSet, schedule: &CommSchedule, t: u64) {
        let n = self.copies.len();
        if schedule.topology() == Topology::Perfect {
            for view in &mut self.copies {
                view.clone_from(true_params);
            }
            return;
        }
        for j in 0..n {
            self.copies[j].agent_mut(j).clone_from(true_params.agent(j));
            let w = schedule.build_weights(t, j);
            let dim = true_params.agent(j).dim();
            let mixed: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut acc = vec![0.0; dim];
                    for (l, &wil) in w[i].iter().enumerate() {
                        if wil != 0.0 {
                            for (a, x) in acc.iter_mut().zip(self.copies[l].agent(j).as_slice()) {
                                *a += wil * x;
                            }
                        }
                    }
                    acc
                })
                .collect();
            for (i, values) in mixed.into_iter().enumerate() {
                self.copies[i].agent_mut(j).as_mut_slice().copy_from_slice(&values);
            }
        }
    }
}

/// Mean Euclidean error `1/(N(N-1)) Σ_i Σ_{j != i} ||θ_i - θ̂^j_i||`.
pub fn belief_error(beliefs: &BeliefTable, true_params: &ParamSet) -> f64 {
    let n = beliefs.num_agents();
    let mut total = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            total += true_params.agent(i).distance(beliefs.view(j).agent(i));
        }
    }
    total / (n * (n - 1)) as f64
}
