//! Exhaustive No-Free-Lunch experiments on small finite search spaces.
//!
//! A function `f: X → Y` with `|X| = m`, `|Y| = r` is a vector of `m` value
//! indices. Search policies are deterministic and must never revisit a
//! point; a seeded stochastic algorithm is one such policy per seed. For a
//! policy, a class of functions and a horizon `k`, the experiment records
//! how often every possible sequence of observed values `(y_1 .. y_k)`
//! occurs. Over the full class `Y^X` these histograms are identical for
//! every policy; over structured classes (for example nondecreasing
//! functions) they need not be.

mod classes;
mod policy;
mod report;

use thiserror::Error;

pub use classes::{
    class_size, enumerate_constant, enumerate_functions, enumerate_monotone, FiniteProblem,
    FunctionClass, DEFAULT_CLASS_CAP,
};
pub use policy::{
    builtin_policy, run_trace, GreedyNeighbor, Lexicographic, MiddleOut, Reverse, SearchPolicy,
    SeededShuffle, BUILTIN_POLICIES,
};
pub use report::{
    compare_on_class, performance_histogram, policy_statistics, verify_nflt, verify_on_class,
    Counterexample, NfltReport, PolicyStatistics, SuccessRow, SuccessTable, TraceHistogram,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NfltError {
    #[error("function class of size {size} exceeds the cap of {cap}")]
    ClassTooLarge { size: String, cap: u64 },

    #[error("policy {policy} revisited index {index} at step {step}")]
    RevisitDetected {
        policy: String,
        step: usize,
        index: usize,
    },

    #[error("policy {policy} chose index {index} outside 0..{m}")]
    IndexOutOfRange {
        policy: String,
        index: usize,
        m: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, NfltError>;
