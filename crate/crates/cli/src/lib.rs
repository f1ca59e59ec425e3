//! Run orchestration for the closed-loop probe-engineering simulator:
//! configuration files, built-in presets, per-restart record files,
//! summaries, and the self-check suite behind the `qmetro` binary.

pub mod config;
pub mod objective;
pub mod presets;
pub mod record;
pub mod runner;
pub mod summary;
pub mod validate;
