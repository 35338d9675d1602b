//! Quantifies how far a set of futures markets deviates from the weak-form
//! efficient-market ideal, using lagged two-point correlations of hourly
//! log-returns.
//!
//! The pipeline: ingest ticks or bars ([`marketdata`]), build an aligned
//! return panel, estimate auto-/cross-correlation functions with errors
//! ([`correlation`]), fit power-law return tails ([`tails`]), and produce the
//! headline diagnostics ([`diagnostics`]): the leader-follower significance
//! table, windowed coefficient histories with constancy tests, and the
//! Correlation-Based Predictability Index (CBPI) against its analytic null.
//!
//! [`synth`] generates panels and tail samples with known population
//! properties; every estimator in the crate is verified against it.
//!
//! All types are immutable after construction and safe to share across
//! threads; estimators are pure functions over panels.

pub mod correlation;
pub mod diagnostics;
pub mod error;
pub mod marketdata;
pub mod stats;
pub mod synth;
pub mod tails;

pub use error::{Error, Result};
pub use marketdata::{AlignedPanel, Bar, ReturnObservation, RolloverCalendar, Tick};
