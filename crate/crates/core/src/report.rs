//! CSV output for metric logs and aggregates.
//!
//! Every file starts with `#`-prefixed provenance lines (code version, master
//! seed, config hash and the full canonical config), followed by a header row
//! and one data row per iteration. Floats carry 17 significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentSpec;
use crate::error::{Error, Result};
use crate::trainer::{Aggregate, MetricLog, AGGREGATE_METRICS};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub master_seed: u64,
    pub config_hash: String,
    pub config_lines: Vec<String>,
    /// Extra `key=value` facts (replication index, selected step size, ...).
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn for_spec(spec: &ExperimentSpec) -> Self {
        Provenance {
            master_seed: spec.train.seed,
            config_hash: spec.config_hash(),
            config_lines: spec.canonical_lines(),
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn write_header(&self, out: &mut String) {
        let _ = writeln!(out, "# code_version={CODE_VERSION}");
        let _ = writeln!(out, "# master_seed={}", self.master_seed);
        let _ = writeln!(out, "# config_hash={}", self.config_hash);
        for line in &self.config_lines {
            let _ = writeln!(out, "# {line}");
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "# {k}={v}");
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn log_columns(num_agents: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "alpha", "t1", "t2"].map(String::from).to_vec();
    cols.extend((0..num_agents).map(|i| format!("rhat_{i}")));
    cols.extend((0..num_agents).map(|i| format!("grad_norm_{i}")));
    cols.extend(
        [
            "grad_norm_mean",
            "grad_norm_joint",
            "grad_sq",
            "belief_error",
            "return_mean",
            "ema_return",
            "rhat_mean",
            "ema_rhat",
        ]
        .map(String::from),
    );
    cols
}

pub fn aggregate_columns() -> Vec<String> {
    let mut cols = vec!["t".to_string(), "alpha".to_string()];
    for m in AGGREGATE_METRICS {
        cols.push(format!("{m}_mean"));
        cols.push(format!("{m}_ci95"));
    }
    cols
}

pub fn log_csv(log: &MetricLog, prov: &Provenance) -> String {
    let mut out = String::new();
    prov.write_header(&mut out);
    out.push_str(&log_columns(log.num_agents).join(","));
    out.push('\n');
    for r in &log.rows {
        let mut fields = vec![r.t.to_string(), fmt_f64(r.alpha), r.t1.to_string(), r.t2.to_string()];
        fields.extend(r.rhat.iter().map(|&x| fmt_f64(x)));
        fields.extend(r.grad_norm.iter().map(|&x| fmt_f64(x)));
        fields.extend(
            [
                r.grad_norm_mean,
                r.grad_norm_joint,
                r.grad_sq,
                r.belief_error,
                r.return_mean,
                r.ema_return,
                r.rhat_mean,
                r.ema_rhat,
            ]
            .map(fmt_f64),
        );
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(agg: &Aggregate, prov: &Provenance) -> String {
    let mut out = String::new();
    prov.write_header(&mut out);
    out.push_str(&aggregate_columns().join(","));
    out.push('\n');
    for r in &agg.rows {
        let mut fields = vec![r.t.to_string(), fmt_f64(r.alpha)];
        for m in &r.metrics {
            fields.push(fmt_f64(m.mean));
            fields.push(fmt_f64(m.half_width));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}
