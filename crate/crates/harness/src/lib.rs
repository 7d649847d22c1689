//! Library surface of the benchmark harness, exposed so the binary and
//! the integration tests share the config and experiment plumbing.

pub mod config;
pub mod experiment;
pub mod validate;
