//! Scenario configs, simulated agents, the run loop and its report.

pub mod agents;
pub mod catalog;
pub mod config;
pub mod engine;
pub mod report;

pub use agents::Role;
pub use config::{ConfigError, ScenarioConfig, SCHEMA_VERSION};
pub use engine::{run_scenario, RunError};
pub use report::{Outcome, Report, REPORT_SCHEMA_VERSION};
