//! Learned-actor + Bayesian-optimization controller for multi-device edge
//! inference offloading, with the simulation environment it is evaluated in.
//!
//! Module map:
//! - [`types`], [`config`], [`rng`]: shared domain types, configuration and seeded substreams.
//! - [`env`]: mobility, fading, latency models and the synthetic detection oracle.
//! - [`bandwidth`]: exact dual solver for the per-slot bandwidth split, plus a reference oracle.
//! - [`critic`]: Gaussian-process surrogate, acquisition functions and hyperparameter refits.
//! - [`actor`]: preference network, candidate quantizer, adaptive candidate count, replay training.
//! - [`orchestrator`]: the per-slot control loop, baselines and experiment runner.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actor;
pub mod bandwidth;
pub mod config;
pub mod critic;
pub mod env;
pub mod error;
pub mod numeric;
pub mod orchestrator;
pub mod rng;
pub mod types;

pub use config::{AcquisitionKind, SystemConfig};
pub use error::{LabError, Result};
pub use types::{decode_one_hot, encode_one_hot, DegradationAction, OneHotAction, SlotObservation, SlotState};
