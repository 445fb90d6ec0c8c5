//! Configured Monte Carlo experiments and their on-disk reports.

pub mod config;
pub mod estimate;
pub mod report;
pub mod scenario;
pub mod validation;

pub use estimate::{emit_estimate, run_estimator, EstimateReport};
pub use config::{parse_config, preset, presets, ExperimentConfig, Preset};
pub use report::emit_report;
pub use scenario::{run_scenario, ScenarioReport};
