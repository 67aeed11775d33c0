//! Benchmark landscapes and the experiment harness.

pub mod landscapes;
pub mod runner;
pub mod stats;

pub use landscapes::{
    ellipsoid, landscape_by_name, needle, rastrigin, sphere, step_discontinuous, Landscape,
    LandscapeKind,
};
pub use runner::{
    results_csv, run_experiment, run_experiment_with, run_one, AlgorithmSpec, ExperimentRow,
    RunOptions, ALGORITHM_IDS,
};
pub use stats::{
    binomial_half_cdf, censored_median, dimensionality_sweep, median, sign_test, summarize,
    CellSummary, CensoredMedian, Comparison, ExperimentSummary, SignTest, SweepRow,
};
