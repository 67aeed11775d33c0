//! CMA-ES-lite: a (μ, λ) evolution strategy with a rank-μ covariance update
//! and median-success step-size control. There are no evolution paths and
//! no weighted recombination. The search runs in unit-cube coordinates of
//! the domain.

use serde::{Deserialize, Serialize};

use super::rank_descending;
use crate::algorithm::{run_sampler, Sampler};
use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::linalg::{self, DenseMatrix};
use crate::rng::RngStream;
use crate::trace::{Dataset, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EsConfig {
    pub lambda: usize,
    pub mu: usize,
    /// Initial step size as a fraction of each domain width.
    pub initial_sigma: f64,
    pub covariance_learning_rate: f64,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            lambda: 10,
            mu: 5,
            initial_sigma: 0.2,
            covariance_learning_rate: 0.2,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.lambda == 0 || self.mu == 0 {
            return bad("lambda and mu must be positive");
        }
        if self.mu > self.lambda {
            return bad("mu must not exceed lambda");
        }
        if !(self.initial_sigma > 0.0) {
            return bad("initial_sigma must be positive");
        }
        if !(self.covariance_learning_rate > 0.0 && self.covariance_learning_rate <= 1.0) {
            return bad("covariance_learning_rate must lie in (0, 1]");
        }
        Ok(())
    }
}

// Median success rule constants.
const SUCCESS_QUANTILE: f64 = 0.3;
const SUCCESS_SMOOTHING: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct EvolutionStrategy {
    config: EsConfig,
    domain: Option<BoxDomain>,
    mean: Vec<f64>,
    sigma: f64,
    cov: DenseMatrix,
    success: f64,
    previous: Option<Vec<f64>>,
    pending_from: Option<usize>,
    condition_history: Vec<f64>,
}

impl EvolutionStrategy {
    pub fn new(config: EsConfig) -> Result<Self> {
        config.validate()?;
        let sigma = config.initial_sigma;
        Ok(Self {
            config,
            domain: None,
            mean: Vec::new(),
            sigma,
            cov: DenseMatrix::zeros(0, 0),
            success: 0.0,
            previous: None,
            pending_from: None,
            condition_history: Vec::new(),
        })
    }

    /// Covariance in unit-cube coordinates.
    pub fn covariance(&self) -> &DenseMatrix {
        &self.cov
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Search mean mapped back to the domain.
    pub fn mean(&self) -> Option<Point> {
        self.domain.as_ref().map(|d| d.from_unit(&self.mean))
    }

    /// `λ_max / λ_min` of the covariance after each completed update.
    pub fn condition_history(&self) -> &[f64] {
        &self.condition_history
    }

    /// Ratio of the longest to the shortest principal axis of the current covariance.
    pub fn axis_ratio(&self) -> f64 {
        condition_estimate(&self.cov).sqrt()
    }

    fn factor(&self) -> Result<DenseMatrix> {
        let n = self.cov.rows();
        let jitter = 1e-14 * self.cov.trace() / n as f64;
        Ok(linalg::cholesky(&self.cov, jitter)?)
    }

    fn sample(&self, rng: &mut RngStream) -> Result<Vec<Point>> {
        let domain = self.domain.as_ref().ok_or(Error::StateNotInitialized)?;
        let a = self.factor()?;
        let n = self.mean.len();
        Ok((0..self.config.lambda)
            .map(|_| {
                let z: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                let u: Vec<f64> = (0..n)
                    .map(|i| self.mean[i] + self.sigma * linalg::dot(&a.row(i)[..=i], &z[..=i]))
                    .collect();
                domain.from_unit(&u)
            })
            .collect())
    }

    fn update(&mut self, offspring: &[(Vec<f64>, f64)]) {
        let n = self.mean.len();
        let values: Vec<f64> = offspring.iter().map(|o| o.1).collect();
        let order = rank_descending(&values);
        let mu = self.config.mu.min(offspring.len());
        let steps: Vec<Vec<f64>> = order[..mu]
            .iter()
            .map(|&i| {
                offspring[i]
                    .0
                    .iter()
                    .zip(&self.mean)
                    .map(|(u, m)| (u - m) / self.sigma)
                    .collect()
            })
            .collect();

        for (i, m) in self.mean.iter_mut().enumerate() {
            *m += self.sigma * steps.iter().map(|s| s[i]).sum::<f64>() / mu as f64;
        }

        let lr = self.config.covariance_learning_rate;
        for i in 0..n {
            for j in 0..=i {
                let scatter = steps.iter().map(|s| s[i] * s[j]).sum::<f64>() / mu as f64;
                let v = (1.0 - lr) * self.cov[(i, j)] + lr * scatter;
                self.cov[(i, j)] = v;
                self.cov[(j, i)] = v;
            }
        }

        // Median success rule: compare against a fixed quantile of the previous generation.
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        if let Some(prev) = &self.previous {
            let lambda = sorted.len() as f64;
            let j = ((SUCCESS_QUANTILE * prev.len() as f64).floor() as usize).min(prev.len() - 1);
            let reference = prev[j];
            let wins = sorted.iter().filter(|&&y| y > reference).count() as f64;
            let z = 2.0 / lambda * (wins - (lambda + 1.0) / 2.0);
            self.success = (1.0 - SUCCESS_SMOOTHING) * self.success + SUCCESS_SMOOTHING * z;
            let damping = (2.0 - 2.0 / n as f64).max(1.0);
            self.sigma = (self.sigma * (self.success / damping).exp()).clamp(1e-12, 1.0);
        }
        self.previous = Some(sorted);
        self.condition_history.push(condition_estimate(&self.cov));
    }
}

impl Sampler for EvolutionStrategy {
    fn name(&self) -> &'static str {
        "es"
    }

    fn initialize(&mut self, domain: &BoxDomain) -> Result<()> {
        let n = domain.dim();
        self.domain = Some(domain.clone());
        self.mean.clear();
        self.sigma = self.config.initial_sigma;
        self.cov = DenseMatrix::identity(n);
        self.success = 0.0;
        self.previous = None;
        self.pending_from = None;
        self.condition_history.clear();
        Ok(())
    }

    fn step(&mut self, data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>> {
        let domain = self.domain.clone().ok_or(Error::StateNotInitialized)?;
        match self.pending_from {
            None => self.mean = (0..domain.dim()).map(|_| rng.uniform()).collect(),
            Some(from) => {
                let offspring: Vec<(Vec<f64>, f64)> = data
                    .tail(from)
                    .iter()
                    .map(|r| (domain.to_unit(&r.x), r.y))
                    .collect();
                self.update(&offspring);
            }
        }
        self.pending_from = Some(data.len());
        self.sample(rng)
    }
}

/// `λ_max / λ_min` of a symmetric positive-definite matrix, by power
/// iteration on the matrix and on its inverse (through Cholesky solves).
pub fn condition_estimate(c: &DenseMatrix) -> f64 {
    let n = c.rows();
    if n == 0 {
        return 1.0;
    }
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let power = |apply: &dyn Fn(&[f64]) -> Option<Vec<f64>>| -> Option<f64> {
        let mut v = start.clone();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w = apply(&v)?;
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return None;
            }
            let next: f64 = linalg::dot(&w, &v) / linalg::dot(&v, &v);
            v = w.iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-12 * next.abs() {
                return Some(next);
            }
            lambda = next;
        }
        Some(lambda)
    };
    let Some(largest) = power(&|v| c.matvec(v).ok()) else {
        return f64::INFINITY;
    };
    let Ok(l) = linalg::cholesky(c, 0.0) else {
        return f64::INFINITY;
    };
    let Some(inv_largest) = power(&|v| linalg::cholesky_solve(&l, v).ok()) else {
        return f64::INFINITY;
    };
    largest * inv_largest
}

pub fn evolution_strategy(
    f: &mut FitnessFunction,
    config: &EsConfig,
    budget: usize,
    rng: &mut RngStream,
) -> Result<RunTrace> {
    config.validate()?;
    if budget < config.lambda {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} is smaller than lambda {}",
            config.lambda
        )));
    }
    let mut es = EvolutionStrategy::new(config.clone())?;
    run_sampler(&mut es, f, rng, Some(budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_of_diagonal() {
        let mut c = DenseMatrix::identity(3);
        c[(1, 1)] = 4.0;
        c[(2, 2)] = 0.5;
        assert!((condition_estimate(&c) - 8.0).abs() < 1e-8);
        assert!((condition_estimate(&DenseMatrix::identity(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_of_rotated() {
        // eigenvalues 3 and 1
        let c = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((condition_estimate(&c) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn config_invariants() {
        assert!(EsConfig {
            mu: 11,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EsConfig {
            covariance_learning_rate: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EsConfig::default().validate().is_ok());
    }
}
