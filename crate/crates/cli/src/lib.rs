//! Batch harness around `echolab`: TOML scenarios, parameter sweeps and
//! deterministic CSV/JSON result tables.

pub mod cli;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod plots;
