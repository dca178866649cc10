//! Scenario files, pipelines, sweeps and figure datasets behind the
//! `collisional` command.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod figures;
pub mod manifest;
pub mod pipeline;
pub mod svg;

pub use config::{parse_config, parse_config_str, ConfigError, ScenarioConfig};
pub use figures::{reproduce, UnknownFigure};
pub use manifest::RunManifest;
pub use pipeline::{run_scenario, run_sweep, Stage};
