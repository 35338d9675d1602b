//! Synthetic data with known population properties: stationary VAR(1)
//! panels (with the exact population lag-1 correlations they imply), heavy-
//! and thin-tailed return samples, and a bridge back to tick/bar form so
//! the whole ingestion pipeline can be exercised end to end.
//!
//! Generation is single-threaded per stream for reproducibility: one seed,
//! one byte-identical output. Normal draws come from a fixed-consumption
//! Box-Muller transform over ChaCha12, so reference outputs are stable
//! across platforms.

mod rng;
mod tailgen;
mod ticks;
mod var;

pub use rng::NormalStream;
pub use tailgen::{generate_tail_sample, TailFamily, TailModel};
pub use ticks::{panel_to_bars, panel_to_ticks};
pub use var::{
    generate_var, generate_var_named, generate_var_ramped, population_lag1_correlation,
    stationary_covariance, Initialization, VarModel,
};
