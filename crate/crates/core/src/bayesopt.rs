//! GP-based Bayesian optimization: Latin-hypercube design, surrogate fit,
//! acquisition maximization, infill, repeat.

use serde::{Deserialize, Serialize};

use crate::algorithm::{run_sampler, Sampler};
use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::gp::{gp_fit, FitConfig, GpModel};
use crate::rng::RngStream;
use crate::trace::{Dataset, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    ExpectedImprovement,
    UpperConfidenceBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoConfig {
    pub init_design_size: usize,
    pub iterations: usize,
    pub acquisition: Acquisition,
    /// EI offset. `None` uses `0.01·|best|`.
    pub xi: Option<f64>,
    pub ucb_beta: f64,
    pub acq_multistarts: usize,
    pub acq_local_steps: usize,
    /// Refit hyperparameters every this many infills; in between the
    /// previous hyperparameters are reused on the enlarged data set.
    pub refit_every: usize,
    pub fit: FitConfig,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            init_design_size: 5,
            iterations: 20,
            acquisition: Acquisition::ExpectedImprovement,
            xi: None,
            ucb_beta: 2.0,
            acq_multistarts: 32,
            acq_local_steps: 50,
            refit_every: 1,
            fit: FitConfig::default(),
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.init_design_size < 2 {
            return bad("init_design_size must be at least 2");
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.xi.is_some_and(|x| !(x >= 0.0)) {
            return bad("xi must be nonnegative");
        }
        if !(self.ucb_beta > 0.0) {
            return bad("ucb_beta must be positive");
        }
        if self.acq_multistarts == 0 || self.acq_local_steps == 0 || self.refit_every == 0 {
            return bad("acq_multistarts, acq_local_steps and refit_every must be positive");
        }
        Ok(())
    }

    /// Total evaluations of a full run.
    pub fn total_evaluations(&self) -> usize {
        self.init_design_size + self.iterations
    }
}

/// `n` points with exactly one point per stratum `[l + j·w/n, l + (j+1)·w/n)`
/// in every dimension.
pub fn latin_hypercube(n: usize, domain: &BoxDomain, rng: &mut RngStream) -> Vec<Point> {
    let dim = domain.dim();
    let strata: Vec<Vec<usize>> = (0..dim).map(|_| rng.permutation(n)).collect();
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let w = domain.width(d) / n as f64;
                    let lo = domain.lower()[d] + strata[d][i] as f64 * w;
                    // Guard the open upper end against rounding.
                    (lo + rng.uniform() * w)
                        .min(lo + w * (1.0 - f64::EPSILON))
                        .max(lo)
                })
                .collect()
        })
        .collect()
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `Δ·Φ(Δ/σ) + σ·φ(Δ/σ)` with `Δ = mean − best − xi`; `max(Δ, 0)` when `σ = 0`.
pub fn expected_improvement(mean: f64, variance: f64, best: f64, xi: f64) -> f64 {
    let delta = mean - best - xi;
    let sigma = variance.max(0.0).sqrt();
    if sigma == 0.0 {
        return delta.max(0.0);
    }
    let z = delta / sigma;
    (delta * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

pub fn upper_confidence_bound(mean: f64, variance: f64, beta: f64) -> f64 {
    mean + beta * variance.max(0.0).sqrt()
}

/// Acquisition value of `x` under `model`; `best` is the incumbent.
pub fn acquisition_value(model: &GpModel, config: &BoConfig, best: f64, x: &[f64]) -> f64 {
    let Ok(p) = model.posterior(x) else {
        return f64::NEG_INFINITY;
    };
    match config.acquisition {
        Acquisition::ExpectedImprovement => {
            let xi = config.xi.unwrap_or(0.01 * best.abs());
            expected_improvement(p.mean, p.variance, best, xi)
        }
        Acquisition::UpperConfidenceBound => {
            upper_confidence_bound(p.mean, p.variance, config.ucb_beta)
        }
    }
}

/// Multistart pattern search over the acquisition surface.
///
/// Each start is uniform in the box and refined by `acq_local_steps` rounds
/// of a coordinate-wise compass search (step halves after a round without
/// improvement, and the search stops once it drops below 1e-6 of the width). The best probe overall is returned; among equal values the
/// earliest probe wins.
pub fn maximize_acquisition(
    model: &GpModel,
    domain: &BoxDomain,
    config: &BoConfig,
    rng: &mut RngStream,
) -> Point {
    let best_y = model
        .train_y()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let acq = |x: &[f64]| acquisition_value(model, config, best_y, x);
    let dim = domain.dim();

    let mut best: Option<(f64, Point)> = None;
    let consider = |v: f64, x: &[f64], best: &mut Option<(f64, Point)>| {
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            *best = Some((v, x.to_vec()));
        }
    };

    for _ in 0..config.acq_multistarts {
        let u: Vec<f64> = (0..dim).map(|_| rng.uniform()).collect();
        let mut x = domain.from_unit(&u);
        let mut v = acq(&x);
        consider(v, &x, &mut best);
        let mut step = 0.05;
        for _ in 0..config.acq_local_steps {
            let mut improved = false;
            for d in 0..dim {
                let h = step * domain.width(d);
                for dir in [1.0, -1.0] {
                    let mut trial = x.clone();
                    trial[d] = (trial[d] + dir * h).clamp(domain.lower()[d], domain.upper()[d]);
                    let tv = acq(&trial);
                    consider(tv, &trial, &mut best);
                    if tv > v {
                        x = trial;
                        v = tv;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-6 {
                    break;
                }
            }
        }
    }
    best.map(|(_, x)| x).unwrap_or_else(|| domain.center())
}

/// Bayesian optimization as a [`Sampler`]: first batch is the Latin
/// hypercube design, then one acquisition maximizer per step.
#[derive(Debug, Clone)]
pub struct BayesOpt {
    config: BoConfig,
    domain: Option<BoxDomain>,
    model: Option<GpModel>,
    infills_since_refit: usize,
}

impl BayesOpt {
    pub fn new(config: BoConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            domain: None,
            model: None,
            infills_since_refit: 0,
        })
    }

    pub fn config(&self) -> &BoConfig {
        &self.config
    }

    /// Surrogate used for the most recent infill.
    pub fn model(&self) -> Option<&GpModel> {
        self.model.as_ref()
    }
}

impl Sampler for BayesOpt {
    fn name(&self) -> &'static str {
        "bo"
    }

    fn initialize(&mut self, domain: &BoxDomain) -> Result<()> {
        self.domain = Some(domain.clone());
        self.model = None;
        self.infills_since_refit = 0;
        Ok(())
    }

    fn step(&mut self, data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>> {
        let domain = self.domain.as_ref().ok_or(Error::StateNotInitialized)?;
        if data.len() < self.config.init_design_size {
            let missing = self.config.init_design_size - data.len();
            return Ok(latin_hypercube(missing, domain, rng));
        }
        let model = match &self.model {
            Some(m) if self.infills_since_refit < self.config.refit_every => {
                self.infills_since_refit += 1;
                m.refit_data(data.points(), data.values())?
            }
            _ => {
                self.infills_since_refit = 1;
                gp_fit(data, &self.config.fit, rng)?
            }
        };
        let x = maximize_acquisition(&model, domain, &self.config, rng);
        self.model = Some(model);
        Ok(vec![x])
    }
}

/// Runs `init_design_size + iterations` evaluations of Bayesian optimization.
pub fn bo_run(f: &mut FitnessFunction, config: &BoConfig, rng: &mut RngStream) -> Result<RunTrace> {
    let mut bo = BayesOpt::new(config.clone())?;
    let needed = config.total_evaluations();
    if let Some(remaining) = f.remaining() {
        if remaining < needed {
            return Err(Error::BudgetExhausted {
                budget: f.budget().unwrap_or(0),
            });
        }
    }
    run_sampler(&mut bo, f, rng, Some(needed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::GpHyperparams;

    #[test]
    fn lhs_strata() {
        let d1 = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let mut rng = RngStream::new(3);
        let one = latin_hypercube(1, &d1, &mut rng);
        assert!(d1.contains(&one[0]));

        let four = latin_hypercube(4, &d1, &mut rng);
        let mut cells: Vec<usize> = four.iter().map(|p| (p[0] * 4.0).floor() as usize).collect();
        cells.sort_unstable();
        assert_eq!(cells, vec![0, 1, 2, 3]);

        let d3 = BoxDomain::new(vec![-1.0, 0.0, 10.0], vec![1.0, 5.0, 11.0]).unwrap();
        let pts = latin_hypercube(10, &d3, &mut rng);
        for dim in 0..3 {
            let mut cells: Vec<usize> = pts
                .iter()
                .map(|p| ((p[dim] - d3.lower()[dim]) / d3.width(dim) * 10.0).floor() as usize)
                .collect();
            cells.sort_unstable();
            assert_eq!(cells, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ei_degenerate_cases() {
        assert_eq!(expected_improvement(0.3, 0.0, 0.5, 0.0), 0.0);
        assert_eq!(expected_improvement(0.5, 0.0, 0.5, 0.0), 0.0);
        assert_eq!(expected_improvement(1.0, 0.0, 0.5, 0.0), 0.5);
        let v = expected_improvement(1.0, 1.0, 0.0, 0.0);
        assert!((v - (normal_cdf(1.0) + normal_pdf(1.0))).abs() < 1e-15);
        assert!((v - 1.08332).abs() < 1e-5);
    }

    #[test]
    fn ei_increases_with_sigma_below_best() {
        for mean in [-3.0, -1.0, -0.1] {
            let mut prev = expected_improvement(mean, 0.0, 0.0, 0.0);
            for i in 1..200 {
                let s = i as f64 * 0.05;
                let v = expected_improvement(mean, s * s, 0.0, 0.0);
                assert!(
                    v > prev || (v == 0.0 && prev == 0.0 && s < 0.2),
                    "mean {mean} sigma {s}"
                );
                prev = v;
            }
        }
    }

    #[test]
    fn cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-15);
    }

    fn center_model() -> GpModel {
        let h = GpHyperparams {
            length_scales: vec![0.2],
            signal_variance: 1.0,
            noise_variance: 0.0,
            prior_mean: 0.0,
        };
        GpModel::new(vec![vec![0.5]], vec![0.0], h, 0.0).unwrap()
    }

    #[test]
    fn ei_vanishes_at_noiseless_data() {
        let m = center_model();
        let cfg = BoConfig::default();
        assert!(acquisition_value(&m, &cfg, 0.0, &[0.5]) < 1e-9);
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let x = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(1));
        assert!((x[0] - 0.5).abs() > 0.05);
    }

    #[test]
    fn maximizer_is_deterministic() {
        let m = center_model();
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let cfg = BoConfig::default();
        let a = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(4));
        let b = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(4));
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(BoConfig {
            init_design_size: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BoConfig {
            iterations: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BoConfig {
            xi: Some(-1.0),
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BoConfig::default().validate().is_ok());
    }

    #[test]
    fn step_before_initialize_fails() {
        let mut bo = BayesOpt::new(BoConfig::default()).unwrap();
        assert!(matches!(
            bo.step(&Dataset::new(), &mut RngStream::new(0)),
            Err(Error::StateNotInitialized)
        ));
    }
}
