//! Networked policy gradient play for Markov potential games.
//!
//! Agents with coupled softmax policies estimate policy gradients from
//! geometric-horizon rollouts, take stochastic ascent steps and track each
//! other's parameters by consensus over time-varying communication graphs.
//!
//! - [`game`]: environment contract and simulator
//! - [`newsvendor`]: the multi-agent newsvendor benchmark and its exact value oracle
//! - [`testbeds`]: small games with enumerable values
//! - [`policy`]: networked and independent softmax policies and their score functions
//! - [`estimation`]: two-episode gradient estimates with Q, advantage and TD reward terms
//! - [`consensus`]: communication schedules, weights and the belief table
//! - [`trainer`]: the training loop, replications and diagnostics
//! - [`config`], [`report`], [`expcli`]: experiment files, CSV output and the command front end
//!
//! Each major capability has a runnable program under `examples/`.

pub mod config;
pub mod consensus;
pub mod error;
pub mod estimation;
pub mod expcli;
pub mod game;
pub mod newsvendor;
pub mod policy;
pub mod report;
pub mod rng;
pub mod testbeds;
pub mod trainer;

pub use error::{Error, Result};
