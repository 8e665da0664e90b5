//! Experiment runner for Time-Block ansatz studies: config parsing, study
//! grids, summaries, tail curves, spread tables and the bitflip-mask
//! experiment. The `timeblock` binary is a thin CLI over this crate.

pub mod attractor;
pub mod config;
pub mod experiment;
pub mod failure;

pub use config::RunConfig;
pub use failure::Failure;
