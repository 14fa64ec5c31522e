//! Command-line front end: run configuration, ray cache and pipeline.

pub mod cache;
pub mod commands;
pub mod config;
pub mod pipeline;
