//! Parses an experiment file and prints each assumption check.
//! Usage: `cargo run --example validate_config -- [file]`

use std::path::PathBuf;

use netpg::config::ExperimentSpec;
use netpg::expcli::validate_spec;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/short_run.cfg")));
    let spec = match ExperimentSpec::load(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    for line in spec.canonical_lines() {
        println!("  {line}");
    }
    for c in validate_spec(&spec) {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
}
