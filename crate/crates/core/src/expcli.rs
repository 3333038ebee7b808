//! Command front end: `run`, `reproduce` and `validate`.
//!
//! Each command returns a process exit code: `0` on success, `1` when the
//! configuration fails validation, `2` for usage and I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentSpec;
use crate::consensus::{BeliefInit, CommSchedule, Topology};
use crate::error::{Error, Result};
use crate::estimation::EstimatorKind;
use crate::newsvendor::Newsvendor;
use crate::policy::PolicyKind;
use crate::report::{aggregate_csv, fmt_f64, log_csv, write_file, Provenance};
use crate::trainer::{run_replications, stationarity_diagnostic, Aggregate, MeanCi};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NETPG_OUT_DIR";

/// Step-size magnitudes searched per condition when reproducing figures.
pub const ALPHA_GRID: [f64; 3] = [10.0, 1.0, 0.1];

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn default_out_dir(spec: &ExperimentSpec) -> PathBuf {
    spec.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Loads the spec (defaults when no path is given) and applies overrides.
pub fn load_spec(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentSpec> {
    let mut spec = match path {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::default(),
    };
    for o in overrides {
        spec.apply_override(o)?;
    }
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: std::result::Result<String, String>) -> Check {
    match outcome {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

/// Checks the game setup and the four standing assumptions on communication,
/// weights, initial beliefs and step sizes.
pub fn validate_spec(spec: &ExperimentSpec) -> Vec<Check> {
    let n = spec.env.n_agents;
    let mut checks = vec![check(
        "game",
        spec.env
            .validate()
            .map(|_| format!("N={n}, D={}, gamma={}", spec.env.demand, spec.env.discount))
            .map_err(|e| e.to_string()),
    )];

    let schedule = CommSchedule::unchecked(spec.train.comm, n);
    checks.push(check(
        "A1 window connectivity",
        match &schedule {
            Err(e) => Err(e.to_string()),
            Ok(s) if s.window_union_connected() => Ok(format!(
                "{} edge union connected over every {}-iteration window",
                s.topology().name(),
                s.period()
            )),
            Ok(s) => Err(format!(
                "{} edge union disconnected for some {}-iteration window",
                s.topology().name(),
                s.period()
            )),
        },
    ));

    checks.push(check(
        "A2 weights",
        match &schedule {
            Err(e) => Err(e.to_string()),
            Ok(s) => weight_check(s),
        },
    ));

    let std = spec.train.init_std;
    checks.push(check(
        "A3 initial beliefs",
        if !(std >= 0.0 && std.is_finite()) {
            Err(format!("init_std {std} is not a finite nonnegative number"))
        } else {
            Ok(match spec.train.init_beliefs {
                BeliefInit::Exact => "exact initialization, kappa = 0".to_string(),
                BeliefInit::Zero => format!(
                    "zero initialization, E|error| per coordinate = {:.4}",
                    std * (2.0 / std::f64::consts::PI).sqrt()
                ),
            })
        },
    ));

    let step = spec.train.step;
    checks.push(check(
        "A4 step sizes",
        step.validate().map_err(|e| e.to_string()).map(|_| {
            let sq = if step.square_summable() {
                "sum of squares converges"
            } else {
                "sum of squares diverges (rate-optimal beta = 1/2 is allowed)"
            };
            format!(
                "alpha_t = {}/t^{}: sum diverges, {sq}",
                step.alpha0, step.beta
            )
        }),
    ));

    checks.push(check(
        "train",
        spec.train
            .validate()
            .map(|_| {
                format!(
                    "{} iterations x {} replications",
                    spec.train.iterations, spec.train.replications
                )
            })
            .map_err(|e| e.to_string()),
    ));
    checks
}

fn weight_check(s: &CommSchedule) -> std::result::Result<String, String> {
    let n = s.num_agents();
    let h = s.min_weight();
    if !(h > 0.0 && h < 1.0) {
        return Err(format!("h = {h} outside (0, 1)"));
    }
    let horizon = (n * (n - 1) * s.period()) as u64;
    for t in 0..horizon {
        for j in 0..n {
            let w = s.build_weights(t, j);
            for (i, row) in w.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(format!("row {i} of W_{j},{t} sums to {sum}"));
                }
                if row.iter().any(|&x| x != 0.0 && x < h) {
                    return Err(format!("row {i} of W_{j},{t} has a weight below h = {h}"));
                }
            }
            if w[j].iter().enumerate().any(|(l, &x)| x != f64::from(u8::from(l == j))) {
                return Err(format!("row {j} of W_{j},{t} is not the unit row"));
            }
        }
    }
    Ok(format!("row-stochastic with h = {h:.4} on t < {horizon}"))
}

fn print_checks(checks: &[Check], out: &mut dyn Write) {
    for c in checks {
        let _ = writeln!(
            out,
            "{:<4}  {:<24}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}

/// `validate`: prints the check table, exit 1 if anything fails.
pub fn cmd_validate(
    spec_path: Option<&Path>,
    overrides: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let spec = match load_spec(spec_path, overrides) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let checks = validate_spec(&spec);
    print_checks(&checks, out);
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub spec: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Writes `rep_NNN.csv` per replication plus `aggregate.csv`; returns the paths.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path, jobs: Option<usize>) -> Result<(Vec<PathBuf>, Aggregate, f64)> {
    let game = Newsvendor::new(spec.env.clone())?;
    let set = run_replications(&game, &spec.train, jobs)?;
    let prov = Provenance::for_spec(spec);
    let mut files = Vec::new();
    for (r, log) in set.logs.iter().enumerate() {
        let path = out_dir.join(format!("rep_{r:03}.csv"));
        let p = prov
            .clone()
            .with("replication", r)
            .with("replication_seed", log.seed);
        write_file(&path, &log_csv(log, &p))?;
        files.push(path);
    }
    let path = out_dir.join("aggregate.csv");
    write_file(
        &path,
        &aggregate_csv(&set.aggregate, &prov.with("replications", set.logs.len())),
    )?;
    files.push(path);

    let window = (spec.train.iterations as usize).min(100);
    let mut diag = 0.0;
    for log in &set.logs {
        diag += stationarity_diagnostic(log, window)?;
    }
    Ok((files, set.aggregate, diag / set.logs.len() as f64))
}

fn fmt_ci(c: MeanCi) -> String {
    format!("{:.5} ± {:.5}", c.mean, c.half_width)
}

/// `run`: replications of one configuration.
pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match load_spec(args.spec.as_deref(), &args.overrides) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let checks = validate_spec(&spec);
    if checks.iter().any(|c| !c.passed) {
        let _ = writeln!(err, "error: invalid configuration");
        print_checks(&checks, err);
        return EXIT_INVALID;
    }
    let out_dir = args.out.clone().unwrap_or_else(|| default_out_dir(&spec));
    let jobs = args.jobs.or(spec.jobs);
    match run_experiment(&spec, &out_dir, jobs) {
        Ok((files, agg, diag)) => {
            let _ = writeln!(out, "wrote {} files to {}", files.len(), out_dir.display());
            let _ = writeln!(out, "final EMA return      {}", fmt_ci(agg.final_value("ema_return")));
            let _ = writeln!(out, "final belief error    {}", fmt_ci(agg.final_value("belief_error")));
            let _ = writeln!(out, "stationarity (min windowed sum ||g_i||^2)  {diag:.6}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::InvalidGame(_) | Error::Disconnected { .. } => EXIT_INVALID,
                _ => EXIT_USAGE,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Networked vs independent policies for each reward estimator.
    Fig2,
    /// Belief errors: estimator grid and topology grid.
    Fig3,
    /// Topology comparison.
    Fig4,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(Error::UnknownFigure(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub label: String,
    pub policy: PolicyKind,
    pub estimator: EstimatorKind,
    pub topology: Topology,
}

const TOPOLOGY_GRID: [Topology; 5] = [
    Topology::Perfect,
    Topology::StaticStar,
    Topology::StaticRing,
    Topology::TimeVaryingStar,
    Topology::TimeVaryingRing,
];

fn short(e: EstimatorKind) -> &'static str {
    match e {
        EstimatorKind::Q => "q",
        EstimatorKind::Advantage => "adv",
        EstimatorKind::Td => "td",
    }
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn conditions(self) -> Vec<Condition> {
        let estimator_grid = |policies: &[PolicyKind], prefix: fn(PolicyKind) -> &'static str| {
            policies
                .iter()
                .flat_map(|&policy| {
                    EstimatorKind::ALL.into_iter().map(move |estimator| Condition {
                        label: format!("{}_{}", prefix(policy), short(estimator)),
                        policy,
                        estimator,
                        topology: Topology::TimeVaryingStar,
                    })
                })
                .collect::<Vec<_>>()
        };
        let topology_grid = || {
            TOPOLOGY_GRID.into_iter().map(|topology| Condition {
                label: format!("topology_{}", topology.name()),
                policy: PolicyKind::Networked,
                estimator: EstimatorKind::Advantage,
                topology,
            })
        };
        match self {
            Figure::Fig2 => estimator_grid(
                &[PolicyKind::Networked, PolicyKind::Independent],
                |p| match p {
                    PolicyKind::Networked => "star",
                    PolicyKind::Independent => "ind",
                },
            ),
            Figure::Fig3 => {
                let mut c = estimator_grid(&[PolicyKind::Networked], |_| "star");
                c.extend(topology_grid());
                c
            }
            Figure::Fig4 => topology_grid().collect(),
        }
    }
}

/// Full description of one figure reproduction.
#[derive(Clone, Debug)]
pub struct ReproducePlan {
    pub figure: Figure,
    /// Settings shared by every condition (environment, seed, β, ...).
    pub base: ExperimentSpec,
    pub replications: usize,
    pub iterations: u64,
    /// Candidate `alpha0` values; the best by final mean EMA return is kept.
    pub alpha_grid: Vec<f64>,
}

impl ReproducePlan {
    /// Benchmark protocol (100 replications, 2000 iterations) shrunk by `scale`.
    pub fn at_scale(figure: Figure, base: ExperimentSpec, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::InvalidConfig(format!("scale {scale} outside (0, 1]")));
        }
        Ok(ReproducePlan {
            figure,
            base,
            replications: ((100.0 * scale).round() as usize).max(2),
            iterations: ((2000.0 * scale).round() as u64).max(1),
            alpha_grid: ALPHA_GRID.to_vec(),
        })
    }

    pub fn spec_for(&self, c: &Condition, alpha0: f64) -> ExperimentSpec {
        let mut spec = self.base.clone();
        spec.train.policy = c.policy;
        spec.train.estimator = c.estimator;
        spec.train.comm.topology = c.topology;
        spec.train.replications = self.replications;
        spec.train.iterations = self.iterations;
        spec.train.step.alpha0 = alpha0;
        spec
    }
}

#[derive(Clone, Debug)]
pub struct ConditionResult {
    pub condition: Condition,
    pub alpha0: f64,
    /// `(alpha0, final mean EMA return)` for every grid point tried.
    pub grid: Vec<(f64, f64)>,
    pub aggregate: Aggregate,
    pub spec: ExperimentSpec,
}

/// Runs every condition of the plan; with `out_dir`, writes one aggregate CSV
/// per condition and `manifest.csv`.
pub fn reproduce(plan: &ReproducePlan, out_dir: Option<&Path>, jobs: Option<usize>) -> Result<Vec<ConditionResult>> {
    if plan.alpha_grid.is_empty() {
        return Err(Error::InvalidConfig("empty step-size grid".into()));
    }
    let game = Newsvendor::new(plan.base.env.clone())?;
    let mut results = Vec::new();
    for condition in plan.figure.conditions() {
        let mut best: Option<(f64, Aggregate, ExperimentSpec)> = None;
        let mut grid = Vec::new();
        for &alpha0 in &plan.alpha_grid {
            let spec = plan.spec_for(&condition, alpha0);
            let agg = run_replications(&game, &spec.train, jobs)?.aggregate;
            let score = agg.final_value("ema_return").mean;
            let score = if score.is_finite() { score } else { f64::NEG_INFINITY };
            grid.push((alpha0, score));
            let better = best
                .as_ref()
                .map_or(true, |(_, b, _)| score > b.final_value("ema_return").mean);
            if better {
                best = Some((alpha0, agg, spec));
            }
        }
        let (alpha0, aggregate, spec) = best.expect("non-empty grid");
        results.push(ConditionResult {
            condition,
            alpha0,
            grid,
            aggregate,
            spec,
        });
    }
    if let Some(dir) = out_dir {
        write_reproduction(plan, &results, dir)?;
    }
    Ok(results)
}

fn write_reproduction(plan: &ReproducePlan, results: &[ConditionResult], dir: &Path) -> Result<()> {
    let mut manifest = String::from(
        "condition,policy,estimator,topology,alpha0,replications,iterations,file,final_ema_return,final_belief_error,final_grad_norm_mean\n",
    );
    for r in results {
        let file = format!("{}.csv", r.condition.label);
        let grid: Vec<String> = r.grid.iter().map(|(a, s)| format!("{a}:{}", fmt_f64(*s))).collect();
        let prov = Provenance::for_spec(&r.spec)
            .with("figure", plan.figure.name())
            .with("condition", &r.condition.label)
            .with("alpha_grid", grid.join(" "))
            .with("replications", plan.replications);
        write_file(&dir.join(&file), &aggregate_csv(&r.aggregate, &prov))?;
        manifest.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.condition.label,
            r.condition.policy.name(),
            r.condition.estimator.name(),
            r.condition.topology.name(),
            r.alpha0,
            plan.replications,
            plan.iterations,
            file,
            fmt_f64(r.aggregate.final_value("ema_return").mean),
            fmt_f64(r.aggregate.final_value("belief_error").mean),
            fmt_f64(r.aggregate.final_value("grad_norm_mean").mean),
        ));
    }
    write_file(&dir.join("manifest.csv"), &manifest)
}

#[derive(Clone, Debug)]
pub struct ReproduceArgs {
    pub figure: String,
    pub scale: f64,
    pub spec: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// `reproduce`: the condition grid of one figure at reduced scale.
pub fn cmd_reproduce(args: &ReproduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let figure = match args.figure.parse::<Figure>() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let spec = match load_spec(args.spec.as_deref(), &args.overrides) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let plan = match ReproducePlan::at_scale(figure, spec, args.scale) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| default_out_dir(&plan.base).join(figure.name()));
    let _ = writeln!(
        out,
        "{}: {} conditions, {} replications x {} iterations, alpha0 grid {:?}",
        figure.name(),
        figure.conditions().len(),
        plan.replications,
        plan.iterations,
        plan.alpha_grid
    );
    match reproduce(&plan, Some(&dir), args.jobs.or(plan.base.jobs)) {
        Ok(results) => {
            for r in &results {
                let _ = writeln!(
                    out,
                    "{:<20} alpha0={:<5} EMA return {}  belief error {}",
                    r.condition.label,
                    r.alpha0,
                    fmt_ci(r.aggregate.final_value("ema_return")),
                    fmt_ci(r.aggregate.final_value("belief_error")),
                );
            }
            let _ = writeln!(out, "wrote {}", dir.join("manifest.csv").display());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}
