// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration, the run pipeline and its on-disk outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod manifest;
pub mod output;
pub mod runner;

pub use config::{load_config, ScenarioConfig};
pub use runner::{run_scenario, RunError, RunOutcome};
