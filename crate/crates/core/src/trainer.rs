//! The networked policy gradient play loop, replication driver and diagnostics.

use rayon::prelude::*;

use crate::consensus::{belief_error, BeliefInit, BeliefTable, CommSchedule, CommSpec, Topology};
use crate::error::{Error, Result};
use crate::estimation::{estimate_gradient, EpisodeStreams, EstimatorKind, GradientEstimate};
use crate::game::{validate_game, MarkovGame};
use crate::policy::{ParamSet, PolicyKind};
use crate::rng::{derive_seed, RngStream, StreamId};

/// Update rate of the exponential moving averages in the metric log.
pub const EMA_RATE: f64 = 0.05;

/// Initial parameter standard deviation of the benchmark setup.
pub const DEFAULT_INIT_STD: f64 = 0.3;

/// `α_t = alpha0 / t^β` with `t` counted from 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub alpha0: f64,
    pub beta: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            alpha0: 1.0,
            beta: 0.5,
        }
    }
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "train.alpha0 must be positive, got {}",
                self.alpha0
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train.beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Step size of iteration `t >= 1`.
    pub fn alpha(&self, t: u64) -> f64 {
        self.alpha0 / (t as f64).powf(self.beta)
    }

    /// Whether `Σ α_t² < ∞`, which needs `β > 1/2`.
    pub fn square_summable(&self) -> bool {
        self.beta > 0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub iterations: u64,
    pub replications: usize,
    pub policy: PolicyKind,
    pub estimator: EstimatorKind,
    pub comm: CommSpec,
    pub init_beliefs: BeliefInit,
    pub step: StepSchedule,
    pub init_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 2000,
            replications: 100,
            policy: PolicyKind::Networked,
            estimator: EstimatorKind::Advantage,
            comm: CommSpec::default(),
            init_beliefs: BeliefInit::Zero,
            step: StepSchedule::default(),
            init_std: DEFAULT_INIT_STD,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("train.iterations must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("train.replications must be >= 1".into()));
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "policy.init_std must be >= 0, got {}",
                self.init_std
            )));
        }
        self.step.validate()
    }

    /// Seed of replication `r`, derived from the master seed.
    pub fn replication_seed(&self, r: usize) -> u64 {
        derive_seed(self.seed, &[0x5245_504c, r as u64])
    }
}

/// One row per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub t: u64,
    pub alpha: f64,
    pub t1: u64,
    pub t2: u64,
    pub rhat: Vec<f64>,
    pub grad_norm: Vec<f64>,
    /// `(1/N) Σ_i ||∇̂_i||`
    pub grad_norm_mean: f64,
    /// Norm of the concatenated gradient.
    pub grad_norm_joint: f64,
    /// `Σ_i ||∇̂_i||²`
    pub grad_sq: f64,
    pub belief_error: f64,
    /// Mean over agents of the `Q̂_i` return estimate.
    pub return_mean: f64,
    pub ema_return: f64,
    pub rhat_mean: f64,
    pub ema_rhat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricLog {
    pub seed: u64,
    pub num_agents: usize,
    pub rows: Vec<MetricRow>,
}

impl MetricLog {
    pub fn last(&self) -> Option<&MetricRow> {
        self.rows.last()
    }
}

fn ema(prev: Option<f64>, x: f64) -> f64 {
    match prev {
        None => x,
        Some(p) => p + EMA_RATE * (x - p),
    }
}

/// Stepwise trainer state: true parameters, beliefs and the iteration counter.
pub struct Trainer<'g, G: MarkovGame> {
    game: &'g G,
    cfg: TrainConfig,
    schedule: CommSchedule,
    seed: u64,
    params: ParamSet,
    beliefs: BeliefTable,
    t: u64,
    ema_return: Option<f64>,
    ema_rhat: Option<f64>,
}

impl<'g, G: MarkovGame> Trainer<'g, G> {
    /// Draws initial parameters from `N(0, init_std²)` using `seed`.
    pub fn new(game: &'g G, cfg: &TrainConfig, seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, StreamId::Init);
        let params = ParamSet::random_normal(game.num_agents(), game.num_actions(), cfg.init_std, &mut rng);
        Trainer::with_params(game, cfg, seed, params)
    }

    pub fn with_params(game: &'g G, cfg: &TrainConfig, seed: u64, params: ParamSet) -> Result<Self> {
        validate_game(game)?;
        cfg.validate()?;
        let schedule = CommSchedule::new(cfg.comm, game.num_agents())?;
        if params.num_agents() != game.num_agents() || params.num_actions() != game.num_actions() {
            return Err(Error::InvalidConfig("parameter shape does not match the game".into()));
        }
        // perfect communication means perfect information from the start
        let init = if cfg.comm.topology == Topology::Perfect {
            BeliefInit::Exact
        } else {
            cfg.init_beliefs
        };
        let beliefs = BeliefTable::new(&params, init);
        Ok(Trainer {
            game,
            cfg: cfg.clone(),
            schedule,
            seed,
            params,
            beliefs,
            t: 0,
            ema_return: None,
            ema_rhat: None,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn beliefs(&self) -> &BeliefTable {
        &self.beliefs
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// One iteration: estimate under beliefs, ascend, exchange beliefs.
    pub fn step(&mut self) -> Result<(MetricRow, GradientEstimate)> {
        self.t += 1;
        let t = self.t;
        let n = self.game.num_agents();
        let mut streams = EpisodeStreams::for_iteration(self.seed, t, n);
        let est = estimate_gradient(
            self.game,
            self.beliefs.views(),
            self.cfg.policy,
            self.cfg.estimator,
            &mut streams,
        )?;
        let alpha = self.cfg.step.alpha(t);
        for (i, g) in est.per_agent.iter().enumerate() {
            for (x, d) in self.params.agent_mut(i).as_mut_slice().iter_mut().zip(g) {
                *x += alpha * d;
            }
        }
        self.beliefs.consensus_step(&self.params, &self.schedule, t - 1);

        let grad_norm: Vec<f64> = est
            .per_agent
            .iter()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let grad_sq: f64 = grad_norm.iter().map(|g| g * g).sum();
        let return_mean = est.qhat.iter().sum::<f64>() / n as f64;
        let rhat_mean = est.rhat.iter().sum::<f64>() / n as f64;
        let ema_return = ema(self.ema_return, return_mean);
        let ema_rhat = ema(self.ema_rhat, rhat_mean);
        self.ema_return = Some(ema_return);
        self.ema_rhat = Some(ema_rhat);

        let row = MetricRow {
            t,
            alpha,
            t1: est.horizons.t1,
            t2: est.horizons.t2,
            rhat: est.rhat.clone(),
            grad_norm_mean: grad_norm.iter().sum::<f64>() / n as f64,
            grad_norm_joint: grad_sq.sqrt(),
            grad_norm,
            grad_sq,
            belief_error: belief_error(&self.beliefs, &self.params),
            return_mean,
            ema_return,
            rhat_mean,
            ema_rhat,
        };
        Ok((row, est))
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ParamSet,
    pub beliefs: BeliefTable,
    pub log: MetricLog,
}

/// Runs `cfg.iterations` iterations from parameters drawn with `seed`.
pub fn train_with_seed<G: MarkovGame>(game: &G, cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(game, cfg, seed)?;
    let mut rows = Vec::with_capacity(cfg.iterations as usize);
    for _ in 0..cfg.iterations {
        rows.push(trainer.step()?.0);
    }
    Ok(TrainOutcome {
        params: trainer.params,
        beliefs: trainer.beliefs,
        log: MetricLog {
            seed,
            num_agents: game.num_agents(),
            rows,
        },
    })
}

/// Single run with the master seed.
pub fn train<G: MarkovGame>(game: &G, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_seed(game, cfg, cfg.seed)
}

/// Metrics aggregated across replications.
pub const AGGREGATE_METRICS: [&str; 8] = [
    "return_mean",
    "ema_return",
    "rhat_mean",
    "ema_rhat",
    "grad_norm_mean",
    "grad_norm_joint",
    "grad_sq",
    "belief_error",
];

fn metric(row: &MetricRow, name: &str) -> f64 {
    match name {
        "return_mean" => row.return_mean,
        "ema_return" => row.ema_return,
        "rhat_mean" => row.rhat_mean,
        "ema_rhat" => row.ema_rhat,
        "grad_norm_mean" => row.grad_norm_mean,
        "grad_norm_joint" => row.grad_norm_joint,
        "grad_sq" => row.grad_sq,
        "belief_error" => row.belief_error,
        other => unreachable!("unknown metric {other}"),
    }
}

/// Mean and 95% normal-approximation half-width of one metric at one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
}

/// Order-independent mean and CI: values are sorted before summation, so the
/// result does not depend on replication order.
pub fn mean_ci(values: &[f64]) -> MeanCi {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return MeanCi {
            mean,
            half_width: 0.0,
        };
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    MeanCi {
        mean,
        half_width: 1.96 * (var / n).sqrt(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub t: u64,
    pub alpha: f64,
    /// One entry per [`AGGREGATE_METRICS`] name.
    pub metrics: Vec<MeanCi>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub replications: usize,
    pub rows: Vec<AggregateRow>,
}

impl Aggregate {
    pub fn metric_index(name: &str) -> Option<usize> {
        AGGREGATE_METRICS.iter().position(|&m| m == name)
    }

    /// Series of one metric's per-iteration means.
    pub fn means(&self, name: &str) -> Vec<f64> {
        let idx = Aggregate::metric_index(name).expect("known metric");
        self.rows.iter().map(|r| r.metrics[idx].mean).collect()
    }

    pub fn final_value(&self, name: &str) -> MeanCi {
        let idx = Aggregate::metric_index(name).expect("known metric");
        self.rows.last().expect("non-empty aggregate").metrics[idx]
    }
}

pub fn aggregate(logs: &[MetricLog]) -> Aggregate {
    let len = logs.iter().map(|l| l.rows.len()).min().unwrap_or(0);
    let rows = (0..len)
        .map(|t| {
            let metrics = AGGREGATE_METRICS
                .iter()
                .map(|name| {
                    let values: Vec<f64> = logs.iter().map(|l| metric(&l.rows[t], name)).collect();
                    mean_ci(&values)
                })
                .collect();
            AggregateRow {
                t: logs[0].rows[t].t,
                alpha: logs[0].rows[t].alpha,
                metrics,
            }
        })
        .collect();
    Aggregate {
        replications: logs.len(),
        rows,
    }
}

#[derive(Clone, Debug)]
pub struct ReplicationSet {
    pub logs: Vec<MetricLog>,
    pub aggregate: Aggregate,
}

/// Runs `cfg.replications` independent replications and aggregates them.
///
/// `jobs` bounds the worker threads; `None` uses the global pool. Output
/// order (and content) does not depend on the number of workers.
pub fn run_replications<G: MarkovGame>(
    game: &G,
    cfg: &TrainConfig,
    jobs: Option<usize>,
) -> Result<ReplicationSet> {
    if cfg.replications < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 replications for confidence intervals, got {}",
            cfg.replications
        )));
    }
    // surface configuration errors once, before spawning work
    Trainer::with_params(
        game,
        cfg,
        cfg.seed,
        ParamSet::zeros(game.num_agents(), game.num_actions()),
    )?;
    let run = || -> Result<Vec<MetricLog>> {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| train_with_seed(game, cfg, cfg.replication_seed(r)).map(|o| o.log))
            .collect()
    };
    let logs = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let aggregate = aggregate(&logs);
    Ok(ReplicationSet { logs, aggregate })
}

/// Running minimum of the trailing-window mean of `Σ_i ||∇̂_i||²`, one value per
/// iteration from `window` on.
pub fn stationarity_trace(log: &MetricLog, window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > log.rows.len() {
        return Err(Error::InvalidConfig(format!(
            "window {window} must lie in 1..={}",
            log.rows.len()
        )));
    }
    let sq: Vec<f64> = log.rows.iter().map(|r| r.grad_sq).collect();
    let mut best = f64::INFINITY;
    Ok(sq
        .windows(window)
        .map(|w| {
            best = best.min(w.iter().sum::<f64>() / window as f64);
            best
        })
        .collect())
}

/// Final value of [`stationarity_trace`].
pub fn stationarity_diagnostic(log: &MetricLog, window: usize) -> Result<f64> {
    Ok(*stationarity_trace(log, window)?.last().expect("non-empty trace"))
}
