//! Scenario runner for the conformal-optics library: configuration parsing, the named
//! figure reproductions and verification suites, and deterministic output files.

pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;
pub mod suites;

pub use config::{ConfigError, ScenarioConfig};
pub use scenarios::{run, Outcome, Scenario, ScenarioError};
