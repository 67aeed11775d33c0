//! Black-box optimization under explicit priors.
//!
//! The crate pairs an exact No-Free-Lunch laboratory ([`nflt`]) with
//! optimizers whose assumptions about the fitness are spelled out: a
//! Gaussian-process Bayesian optimizer ([`bayesopt`]) and a set of simple
//! metaheuristics ([`metaheuristics`]). The [`bench`] module supplies test
//! landscapes and the experiment runner used to compare them.
//!
//! Conventions shared by every module:
//!
//! * fitness is **maximized**; minimization problems are negated;
//! * each run owns one [`RngStream`] and one [`FitnessFunction`], so runs are
//!   reproducible bit for bit and can execute in parallel;
//! * proposals outside the [`BoxDomain`] are clamped before evaluation and
//!   the clamp is recorded in the trace.

pub mod algorithm;
pub mod bayesopt;
pub mod bench;
pub mod domain;
pub mod error;
pub mod fitness;
pub mod gp;
pub mod linalg;
pub mod metaheuristics;
pub mod nflt;
pub mod rng;
pub mod trace;

pub use algorithm::{run_sampler, Sampler};
pub use domain::{BoxDomain, Point};
pub use error::{Error, Result};
pub use fitness::{EvaluatorError, FitnessFunction, Objective};
pub use rng::RngStream;
pub use trace::{Dataset, Record, RunTrace};
