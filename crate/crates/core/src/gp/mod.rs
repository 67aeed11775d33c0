//! Gaussian-process surrogate with an ARD squared-exponential kernel.
//!
//! The kernel is `σ_f² · exp(−½ Σ_d ((a_d − b_d)/φ_d)²)`; observation noise
//! `σ_n²` is added on the diagonal of the training Gram matrix. The prior
//! mean is a constant, normally the mean of the training targets.

mod fit;
mod likelihood;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Point;
use crate::linalg::{self, DenseMatrix, LinalgError};

pub use fit::{constant_data_hyperparams, gp_fit, gp_fit_xy, FitConfig};
pub use likelihood::{log_marginal_likelihood, log_marginal_likelihood_value, Lml};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} training points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("posterior variance {0:e} is negative beyond round-off")]
    NegativeVariance(f64),

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, GpError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub prior_mean: f64,
}

impl GpHyperparams {
    /// Unit amplitude, `σ_n² = 1e-8`, zero prior mean.
    pub fn isotropic(dim: usize, length_scale: f64) -> Self {
        Self {
            length_scales: vec![length_scale; dim],
            signal_variance: 1.0,
            noise_variance: 1e-8,
            prior_mean: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.length_scales.is_empty() {
            return Err(GpError::InvalidHyperparams("no length scales".into()));
        }
        if let Some(bad) = self
            .length_scales
            .iter()
            .find(|&&l| !(l > 0.0 && l.is_finite()))
        {
            return Err(GpError::InvalidHyperparams(format!("length scale {bad}")));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(GpError::InvalidHyperparams(format!(
                "signal variance {}",
                self.signal_variance
            )));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(GpError::InvalidHyperparams(format!(
                "noise variance {}",
                self.noise_variance
            )));
        }
        if !self.prior_mean.is_finite() {
            return Err(GpError::InvalidHyperparams("prior mean".into()));
        }
        Ok(())
    }

    /// `(ln φ_1 .. ln φ_n, ln σ_f², ln σ_n²)`.
    pub fn to_log_params(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.length_scales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.ln());
        v
    }

    pub fn from_log_params(theta: &[f64], prior_mean: f64) -> Self {
        let n = theta.len() - 2;
        Self {
            length_scales: theta[..n].iter().map(|t| t.exp()).collect(),
            signal_variance: theta[n].exp(),
            noise_variance: theta[n + 1].exp(),
            prior_mean,
        }
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(GpError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `exp(−½ Σ_d ((a_d − b_d)/φ_d)²)` without the amplitude.
fn correlation(a: &[f64], b: &[f64], length_scales: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(length_scales)
        .map(|((p, q), l)| {
            let z = (p - q) / l;
            z * z
        })
        .sum();
    (-0.5 * r2).exp()
}

pub fn kernel_ard_sqexp(xi: &[f64], xj: &[f64], hyper: &GpHyperparams) -> Result<f64> {
    check_dim(hyper.dim(), xi.len())?;
    check_dim(hyper.dim(), xj.len())?;
    Ok(hyper.signal_variance * correlation(xi, xj, &hyper.length_scales))
}

/// Gram matrix of the kernel (no noise term).
pub fn kernel_matrix(xs: &[Point], hyper: &GpHyperparams) -> Result<DenseMatrix> {
    let n = xs.len();
    if n == 0 {
        return Err(GpError::InsufficientData { needed: 1, got: 0 });
    }
    for x in xs {
        check_dim(hyper.dim(), x.len())?;
    }
    let mut k = DenseMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = hyper.signal_variance;
        for j in 0..i {
            let v = hyper.signal_variance * correlation(&xs[i], &xs[j], &hyper.length_scales);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Posterior mean and variance of the latent function at one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Persisted form of a [`GpModel`]: data and hyperparameters only. The
/// factorization is recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModelData {
    pub train_x: Vec<Point>,
    pub train_y: Vec<f64>,
    pub hyper: GpHyperparams,
    #[serde(default)]
    pub jitter: f64,
}

/// A GP conditioned on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GpModelData", into = "GpModelData")]
pub struct GpModel {
    train_x: Vec<Point>,
    train_y: Vec<f64>,
    hyper: GpHyperparams,
    jitter: f64,
    chol: DenseMatrix,
    alpha: Vec<f64>,
}

impl TryFrom<GpModelData> for GpModel {
    type Error = GpError;

    fn try_from(d: GpModelData) -> Result<Self> {
        GpModel::new(d.train_x, d.train_y, d.hyper, d.jitter)
    }
}

impl From<GpModel> for GpModelData {
    fn from(m: GpModel) -> Self {
        Self {
            train_x: m.train_x,
            train_y: m.train_y,
            hyper: m.hyper,
            jitter: m.jitter,
        }
    }
}

/// Cholesky factor of `K + (σ_n² + jitter)·I`.
pub(crate) fn noisy_gram_factor(
    xs: &[Point],
    hyper: &GpHyperparams,
    jitter: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let k = kernel_matrix(xs, hyper)?;
    let l = linalg::cholesky(&k, hyper.noise_variance + jitter)?;
    Ok((k, l))
}

impl GpModel {
    /// Conditions the prior given by `hyper` on `(train_x, train_y)`.
    /// `jitter` is added to the diagonal on top of `σ_n²`.
    pub fn new(
        train_x: Vec<Point>,
        train_y: Vec<f64>,
        hyper: GpHyperparams,
        jitter: f64,
    ) -> Result<Self> {
        hyper.validate()?;
        check_dim(train_x.len(), train_y.len())?;
        if !(jitter >= 0.0) {
            return Err(GpError::InvalidHyperparams(format!("jitter {jitter}")));
        }
        let (_, chol) = noisy_gram_factor(&train_x, &hyper, jitter)?;
        let centered: Vec<f64> = train_y.iter().map(|y| y - hyper.prior_mean).collect();
        let alpha = linalg::cholesky_solve(&chol, &centered)?;
        Ok(Self {
            train_x,
            train_y,
            hyper,
            jitter,
            chol,
            alpha,
        })
    }

    pub fn train_x(&self) -> &[Point] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn chol(&self) -> &DenseMatrix {
        &self.chol
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.hyper.dim()
    }

    /// Same hyperparameters, new data.
    pub fn refit_data(&self, train_x: Vec<Point>, train_y: Vec<f64>) -> Result<Self> {
        let mut hyper = self.hyper.clone();
        if !train_y.is_empty() {
            hyper.prior_mean = train_y.iter().sum::<f64>() / train_y.len() as f64;
        }
        Self::new(train_x, train_y, hyper, self.jitter)
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Posterior> {
        check_dim(self.dim(), x.len())?;
        let sf2 = self.hyper.signal_variance;
        let kstar: Vec<f64> = self
            .train_x
            .iter()
            .map(|xi| sf2 * correlation(xi, x, &self.hyper.length_scales))
            .collect();
        let mean = self.hyper.prior_mean + linalg::dot(&kstar, &self.alpha);
        let v = linalg::solve_lower(&self.chol, &kstar)?;
        let variance = sf2 - linalg::dot(&v, &v);
        // Below the round-off level of sf2 - v·v the variance is noise; a
        // noiseless model must report exactly zero at its own data.
        let floor = -1e-8 * sf2.max(1.0);
        let variance = if variance >= 1e-12 * sf2 {
            variance
        } else if variance >= floor {
            0.0
        } else {
            return Err(GpError::NegativeVariance(variance));
        };
        Ok(Posterior { mean, variance })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
