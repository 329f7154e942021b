//! Selecting the number of clusters by stability difference.
//!
//! A candidate clustering with K clusters is scored by how stable it is
//! under additive noise (between-cluster stability) minus how stable a
//! re-clustering of each of its clusters is (within-cluster stability).
//! Good solutions are stable as a whole but have no stable sub-structure.

pub mod baselines;
pub mod benchmark;
pub mod clusterers;
pub mod dataset;
pub mod error;
pub mod partitions;
pub mod perturbation;
pub mod report;
pub mod seeds;
pub mod stability;

pub use error::{ErrorCategory, Result, StadionError};
