//! Cross-product experiment runner.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bayesopt::{bo_run, BoConfig};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::metaheuristics::{
    evolution_strategy, genetic_algorithm, random_search, simulated_annealing, EsConfig, GaConfig,
    SaConfig,
};
use crate::rng::RngStream;
use crate::trace::RunTrace;

use super::landscapes::Landscape;

/// An optimizer plus its settings. Serialized with an `algorithm` tag, e.g.
/// `{"algorithm": "sa", "initial_temp": 2.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Random,
    Sa(SaConfig),
    Ga(GaConfig),
    Es(EsConfig),
    /// `iterations` is overridden so that the run uses the whole budget.
    Bo(BoConfig),
}

pub const ALGORITHM_IDS: [&str; 5] = ["random", "sa", "ga", "es", "bo"];

impl AlgorithmSpec {
    /// Default settings for an algorithm id.
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "random" => Self::Random,
            "sa" => Self::Sa(SaConfig::default()),
            "ga" => Self::Ga(GaConfig::default()),
            "es" => Self::Es(EsConfig::default()),
            "bo" => Self::Bo(BoConfig::default()),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown algorithm {other}; expected one of {}",
                    ALGORITHM_IDS.join(", ")
                )))
            }
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Sa(_) => "sa",
            Self::Ga(_) => "ga",
            Self::Es(_) => "es",
            Self::Bo(_) => "bo",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Random => Ok(()),
            Self::Sa(c) => c.validate(),
            Self::Ga(c) => c.validate(),
            Self::Es(c) => c.validate(),
            Self::Bo(c) => c.validate(),
        }
    }

    /// Runs exactly `budget` evaluations (fewer only if `f` has a smaller
    /// budget of its own).
    pub fn run(
        &self,
        f: &mut FitnessFunction,
        budget: usize,
        rng: &mut RngStream,
    ) -> Result<RunTrace> {
        match self {
            Self::Random => random_search(f, budget, rng),
            Self::Sa(c) => simulated_annealing(f, c, budget, rng),
            Self::Ga(c) => genetic_algorithm(f, c, budget, rng),
            Self::Es(c) => evolution_strategy(f, c, budget, rng),
            Self::Bo(c) => {
                if budget <= c.init_design_size {
                    return Err(Error::InvalidConfig(format!(
                        "budget {budget} leaves no infill after {} design points",
                        c.init_design_size
                    )));
                }
                let mut cfg = c.clone();
                cfg.iterations = budget - c.init_design_size;
                bo_run(f, &cfg, rng)
            }
        }
    }
}

/// One (algorithm, landscape, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub algorithm: String,
    pub landscape: String,
    pub dimension: usize,
    pub seed: u64,
    /// 1-based; `None` is DNF.
    pub evals_to_threshold: Option<usize>,
    pub final_best: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    /// Worker threads.
    pub jobs: usize,
    /// End a run as soon as it attains the landscape's known best. Neither
    /// `final_best` nor `evals_to_threshold` can change after that point.
    pub stop_at_known_best: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            stop_at_known_best: false,
        }
    }
}

pub fn run_one(
    algorithm: &AlgorithmSpec,
    landscape: &Landscape,
    seed: u64,
    budget: usize,
    options: &RunOptions,
) -> Result<ExperimentRow> {
    let mut f = landscape.fitness();
    if options.stop_at_known_best {
        f = f.with_target(landscape.known_best);
    }
    let mut rng = RngStream::new(seed);
    let trace = algorithm.run(&mut f, budget, &mut rng)?;
    Ok(ExperimentRow {
        algorithm: algorithm.id().to_string(),
        landscape: landscape.name.clone(),
        dimension: landscape.dimension,
        seed,
        evals_to_threshold: trace.evaluations_to_threshold(landscape.threshold),
        final_best: trace.final_best().unwrap_or(f64::NEG_INFINITY),
        evaluations: trace.len(),
    })
}

/// Runs every (algorithm, landscape, seed) combination sequentially.
/// Rows come out in algorithm-major, then landscape, then seed order.
pub fn run_experiment(
    algorithms: &[AlgorithmSpec],
    landscapes: &[Landscape],
    seeds: &[u64],
    budget: usize,
) -> Result<Vec<ExperimentRow>> {
    run_experiment_with(
        algorithms,
        landscapes,
        seeds,
        budget,
        &RunOptions::default(),
    )
}

/// As [`run_experiment`], spread over `options.jobs` worker threads. Every
/// run has its own fitness oracle and random stream, so the rows do not
/// depend on `jobs` or on scheduling.
pub fn run_experiment_with(
    algorithms: &[AlgorithmSpec],
    landscapes: &[Landscape],
    seeds: &[u64],
    budget: usize,
    options: &RunOptions,
) -> Result<Vec<ExperimentRow>> {
    if algorithms.is_empty() || landscapes.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidConfig(
            "algorithms, landscapes and seeds must all be nonempty".into(),
        ));
    }
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    for a in algorithms {
        a.validate()?;
    }
    let mut tasks = Vec::new();
    for a in algorithms {
        for l in landscapes {
            for &s in seeds {
                tasks.push((a, l, s));
            }
        }
    }
    let jobs = options.jobs.clamp(1, tasks.len());
    if jobs == 1 {
        return tasks
            .into_iter()
            .map(|(a, l, s)| run_one(a, l, s, budget, options))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ExperimentRow>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(a, l, s)) = tasks.get(i) else {
                    break;
                };
                let row = run_one(a, l, s, budget, options);
                slots.lock().expect("result slots poisoned")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect()
}

/// CSV with header `algorithm,landscape,dimension,seed,evals_to_threshold,final_best`.
/// DNF is written as an empty `evals_to_threshold` field; `final_best` uses
/// the shortest representation that round-trips.
pub fn results_csv(rows: &[ExperimentRow]) -> String {
    let mut out =
        String::from("algorithm,landscape,dimension,seed,evals_to_threshold,final_best\n");
    for r in rows {
        let evals = r
            .evals_to_threshold
            .map(|e| e.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{:?}\n",
            r.algorithm, r.landscape, r.dimension, r.seed, evals, r.final_best
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::landscapes::{needle, sphere};

    #[test]
    fn one_by_one_by_one() {
        let rows =
            run_experiment(&[AlgorithmSpec::Random], &[sphere(2).unwrap()], &[7], 30).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].evaluations, 30);
        assert_eq!(rows[0].algorithm, "random");
    }

    #[test]
    fn canonical_order_and_parallel_equivalence() {
        let algs = [AlgorithmSpec::Random, AlgorithmSpec::from_id("sa").unwrap()];
        let lands = [sphere(2).unwrap(), needle(2, 0.05).unwrap()];
        let seeds = [1, 2, 3];
        let a = run_experiment(&algs, &lands, &seeds, 40).unwrap();
        let opts = RunOptions {
            jobs: 4,
            stop_at_known_best: false,
        };
        let b = run_experiment_with(&algs, &lands, &seeds, 40, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert_eq!(a[0].algorithm, "random");
        assert_eq!(a[3].landscape, "needle");
        assert_eq!(a[6].algorithm, "sa");
        assert_eq!(a[7].seed, 2);
    }

    #[test]
    fn evals_within_budget() {
        let rows = run_experiment(
            &[AlgorithmSpec::Random],
            &[needle(1, 0.1).unwrap()],
            &(0..50).collect::<Vec<_>>(),
            25,
        )
        .unwrap();
        for r in rows {
            if let Some(e) = r.evals_to_threshold {
                assert!((1..=25).contains(&e));
                assert_eq!(r.final_best, 1.0);
            }
        }
    }

    #[test]
    fn early_stop_keeps_reported_fields() {
        let lands = [needle(2, 0.1).unwrap()];
        let seeds: Vec<u64> = (0..30).collect();
        let full = run_experiment(&[AlgorithmSpec::Random], &lands, &seeds, 80).unwrap();
        let opts = RunOptions {
            jobs: 1,
            stop_at_known_best: true,
        };
        let short =
            run_experiment_with(&[AlgorithmSpec::Random], &lands, &seeds, 80, &opts).unwrap();
        for (a, b) in full.iter().zip(&short) {
            assert_eq!(a.evals_to_threshold, b.evals_to_threshold);
            assert_eq!(a.final_best, b.final_best);
            assert_eq!(b.evaluations, b.evals_to_threshold.unwrap_or(80));
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(run_experiment(&[], &[sphere(1).unwrap()], &[1], 10).is_err());
        assert!(run_experiment(&[AlgorithmSpec::Random], &[], &[1], 10).is_err());
        assert!(run_experiment(&[AlgorithmSpec::Random], &[sphere(1).unwrap()], &[], 10).is_err());
        assert!(AlgorithmSpec::from_id("hill-climb").is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        for id in ALGORITHM_IDS {
            let a = AlgorithmSpec::from_id(id).unwrap();
            let s = serde_json::to_string(&a).unwrap();
            let back: AlgorithmSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(a, back);
        }
        let partial: AlgorithmSpec =
            serde_json::from_str(r#"{"algorithm":"sa","initial_temp":2.0}"#).unwrap();
        match partial {
            AlgorithmSpec::Sa(c) => {
                assert_eq!(c.initial_temp, 2.0);
                assert_eq!(c.cooling_rate, SaConfig::default().cooling_rate);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn csv_format() {
        let rows = vec![ExperimentRow {
            algorithm: "random".into(),
            landscape: "needle".into(),
            dimension: 2,
            seed: 9,
            evals_to_threshold: None,
            final_best: 0.0,
            evaluations: 10,
        }];
        assert_eq!(
            results_csv(&rows),
            "algorithm,landscape,dimension,seed,evals_to_threshold,final_best\nrandom,needle,2,9,,0.0\n"
        );
    }
}
