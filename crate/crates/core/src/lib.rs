//! High-dimensional Bayesian optimization by restricting acquisition
//! maximization to a growing pool of random axis-aligned low-dimensional
//! subspaces of `[-1,1]^D`, plus full-space GP-UCB, a line-subspace
//! baseline and random search, standard benchmark objectives, and a
//! calculator for the theoretical cumulative-regret bound curves.

pub mod acquisition;
pub mod benchmarks;
pub mod bounds;
pub mod error;
pub mod gp;
pub mod optimizer;
pub mod subspace;

pub use error::{Error, Result};
