//! Bayesian-optimisation critic: a GP surrogate of the slot utility over
//! (channel, action, slot) and acquisition-based ranking of candidate actions.

mod acquisition;
mod cache;
mod gp;
mod kernel;
pub mod linalg;

pub use acquisition::{acquisition, argmax_first, select_action, Selection};
pub use cache::{BoCache, Observation};
pub use gp::{lml_gradient, log_marginal_likelihood, refit, GpModel, RefitOutcome, Standardizer, JITTER_LADDER};
pub use kernel::{categorical, combine, kernel, rbf, temporal, GpInput, KernelParams};
