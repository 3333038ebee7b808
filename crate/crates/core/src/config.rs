//! Experiment files: flat `section.key = value` lines.
//!
//! ```text
//! # newsvendor defaults
//! env.n_agents = 5
//! comm.topology = tv_star
//! train.estimator = advantage
//! ```
//!
//! Blank lines and `#` comments are ignored, unknown or repeated keys are
//! errors. A bare key such as `estimator` is accepted when exactly one section
//! defines it.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::consensus::{BeliefInit, Topology};
use crate::error::{Error, Result};
use crate::estimation::EstimatorKind;
use crate::newsvendor::NewsvendorConfig;
use crate::policy::PolicyKind;
use crate::trainer::TrainConfig;

/// Every recognized key, in canonical order.
pub const KEYS: [&str; 20] = [
    "env.n_agents",
    "env.demand",
    "env.cost_opportunity",
    "env.cost_storage",
    "env.discount",
    "env.initial_inventory",
    "policy.kind",
    "policy.init_std",
    "comm.topology",
    "comm.period",
    "comm.hub",
    "comm.init_beliefs",
    "train.estimator",
    "train.iterations",
    "train.replications",
    "train.alpha0",
    "train.beta",
    "train.seed",
    "train.out_dir",
    "train.jobs",
];

/// Keys that do not influence results and are left out of the config hash.
const NON_SEMANTIC: [&str; 2] = ["train.out_dir", "train.jobs"];

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentSpec {
    pub env: NewsvendorConfig,
    pub train: TrainConfig,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Maps a possibly bare key onto its canonical `section.key` form.
pub fn resolve_key(key: &str) -> std::result::Result<&'static str, String> {
    if let Some(k) = KEYS.iter().find(|&&k| k == key) {
        return Ok(k);
    }
    let matches: Vec<&'static str> = KEYS
        .iter()
        .copied()
        .filter(|k| k.split_once('.').map(|(_, tail)| tail) == Some(key))
        .collect();
    match matches.as_slice() {
        [k] => Ok(k),
        [] => Err(format!("unknown key `{key}`")),
        _ => Err(format!("ambiguous key `{key}`: {}", matches.join(", "))),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad value `{value}` for {key}: {e}"))
}

impl ExperimentSpec {
    pub fn from_str_named(text: &str, path: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = resolve_key(key.trim()).map_err(err)?;
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key);
            spec.set_canonical(key, value.trim()).map_err(err)?;
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentSpec::from_str_named(&text, path)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("override `{assignment}` is not key=value"))
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = resolve_key(key).map_err(Error::InvalidConfig)?;
        self.set_canonical(key, value).map_err(Error::InvalidConfig)
    }

    fn set_canonical(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let t = &mut self.train;
        let e = &mut self.env;
        match key {
            "env.n_agents" => e.n_agents = parse(key, value)?,
            "env.demand" => e.demand = parse(key, value)?,
            "env.cost_opportunity" => e.cost_opportunity = parse(key, value)?,
            "env.cost_storage" => e.cost_storage = parse(key, value)?,
            "env.discount" => e.discount = parse(key, value)?,
            "env.initial_inventory" => e.initial_inventory = parse(key, value)?,
            "policy.kind" => t.policy = value.parse::<PolicyKind>()?,
            "policy.init_std" => t.init_std = parse(key, value)?,
            "comm.topology" => t.comm.topology = value.parse::<Topology>()?,
            "comm.period" => t.comm.period = parse(key, value)?,
            "comm.hub" => t.comm.hub = parse(key, value)?,
            "comm.init_beliefs" => t.init_beliefs = value.parse::<BeliefInit>()?,
            "train.estimator" => t.estimator = value.parse::<EstimatorKind>()?,
            "train.iterations" => t.iterations = parse(key, value)?,
            "train.replications" => t.replications = parse(key, value)?,
            "train.alpha0" => t.step.alpha0 = parse(key, value)?,
            "train.beta" => t.step.beta = parse(key, value)?,
            "train.seed" => t.seed = parse(key, value)?,
            "train.out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "train.jobs" => self.jobs = Some(parse(key, value)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<String> {
        let t = &self.train;
        let e = &self.env;
        Some(match key {
            "env.n_agents" => e.n_agents.to_string(),
            "env.demand" => e.demand.to_string(),
            "env.cost_opportunity" => e.cost_opportunity.to_string(),
            "env.cost_storage" => e.cost_storage.to_string(),
            "env.discount" => e.discount.to_string(),
            "env.initial_inventory" => e.initial_inventory.to_string(),
            "policy.kind" => t.policy.name().to_string(),
            "policy.init_std" => t.init_std.to_string(),
            "comm.topology" => t.comm.topology.name().to_string(),
            "comm.period" => t.comm.period.to_string(),
            "comm.hub" => t.comm.hub.to_string(),
            "comm.init_beliefs" => t.init_beliefs.name().to_string(),
            "train.estimator" => t.estimator.name().to_string(),
            "train.iterations" => t.iterations.to_string(),
            "train.replications" => t.replications.to_string(),
            "train.alpha0" => t.step.alpha0.to_string(),
            "train.beta" => t.step.beta.to_string(),
            "train.seed" => t.seed.to_string(),
            "train.out_dir" => self.out_dir.as_ref()?.display().to_string(),
            "train.jobs" => self.jobs?.to_string(),
            _ => return None,
        })
    }

    /// `key=value` lines of every result-relevant setting, in canonical order.
    pub fn canonical_lines(&self) -> Vec<String> {
        KEYS.iter()
            .filter(|k| !NON_SEMANTIC.contains(k))
            .filter_map(|k| self.get(k).map(|v| format!("{k}={v}")))
            .collect()
    }

    /// Full file text that parses back to this spec.
    pub fn to_file_string(&self) -> String {
        KEYS.iter()
            .filter_map(|k| self.get(k).map(|v| format!("{k} = {v}\n")))
            .collect()
    }

    /// SHA-256 over [`canonical_lines`](Self::canonical_lines), hex encoded.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for line in self.canonical_lines() {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        format!("{:x}", h.finalize())
    }
}
