//! Type-II maximum likelihood: projected gradient ascent on the log marginal
//! likelihood in log-hyperparameter space, restarted from log-uniform draws.

use serde::{Deserialize, Serialize};

use super::likelihood::{log_marginal_likelihood, log_marginal_likelihood_value};
use super::{GpError, GpHyperparams, GpModel, Result};
use crate::domain::Point;
use crate::rng::RngStream;
use crate::trace::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub multistarts: usize,
    /// Gradient steps per start.
    pub max_iters: usize,
    /// Stop a start once an accepted step gains less than `tol·(1 + |L|)`.
    pub tol: f64,
    /// Added to the diagonal on top of the fitted noise variance.
    pub jitter: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            multistarts: 8,
            max_iters: 60,
            tol: 1e-9,
            jitter: 0.0,
        }
    }
}

/// Box in log-hyperparameter space, scaled to the data.
struct LogBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LogBounds {
    fn new(widths: &[f64], y_var: f64) -> Self {
        let mut lower: Vec<f64> = widths.iter().map(|w| (1e-3 * w).ln()).collect();
        let mut upper: Vec<f64> = widths.iter().map(|w| (1e2 * w).ln()).collect();
        lower.push((1e-4 * y_var).ln());
        upper.push((1e4 * y_var).ln());
        lower.push((1e-10 * y_var).ln());
        upper.push(y_var.ln());
        Self { lower, upper }
    }

    fn project(&self, theta: &mut [f64]) {
        for ((t, lo), hi) in theta.iter_mut().zip(&self.lower).zip(&self.upper) {
            *t = t.clamp(*lo, *hi);
        }
    }
}

fn variance(ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Bounding-box widths of the inputs; degenerate axes count as unit width.
fn input_widths(xs: &[Point]) -> Vec<f64> {
    let d = xs[0].len();
    (0..d)
        .map(|k| {
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x[k]), hi.max(x[k]))
                });
            let w = hi - lo;
            if w > 0.0 && w.is_finite() {
                w
            } else {
                1.0
            }
        })
        .collect()
}

fn log_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    rng.uniform_in(lo.ln(), hi.ln())
}

struct Objective<'a> {
    xs: &'a [Point],
    ys: &'a [f64],
    mean: f64,
    jitter: f64,
}

impl Objective<'_> {
    fn value(&self, theta: &[f64]) -> f64 {
        let h = GpHyperparams::from_log_params(theta, self.mean);
        match log_marginal_likelihood_value(self.xs, self.ys, &h, self.jitter) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    }

    fn gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let h = GpHyperparams::from_log_params(theta, self.mean);
        log_marginal_likelihood(self.xs, self.ys, &h, self.jitter)
            .ok()
            .map(|l| l.gradient)
            .filter(|g| g.iter().all(|v| v.is_finite()))
    }
}

/// Runs projected gradient ascent from `theta`; never returns a point worse than the start.
fn ascend(
    obj: &Objective<'_>,
    bounds: &LogBounds,
    mut theta: Vec<f64>,
    config: &FitConfig,
) -> (Vec<f64>, f64) {
    let mut value = obj.value(&theta);
    let mut step = 0.5;
    for _ in 0..config.max_iters {
        let Some(grad) = obj.gradient(&theta) else {
            break;
        };
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-10 {
            let mut trial: Vec<f64> = theta
                .iter()
                .zip(&grad)
                .map(|(p, g)| p + t * g / norm)
                .collect();
            bounds.project(&mut trial);
            let moved: f64 = trial
                .iter()
                .zip(&theta)
                .zip(&grad)
                .map(|((a, b), g)| (a - b) * g)
                .sum();
            if moved <= 0.0 {
                // Projection cancelled the step entirely.
                break;
            }
            let v = obj.value(&trial);
            if v >= value + 1e-4 * moved {
                accepted = Some((trial, v));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, v)) = accepted else { break };
        let gain = v - value;
        theta = trial;
        value = v;
        step = (2.0 * t).min(4.0);
        if gain < config.tol * (1.0 + value.abs()) {
            break;
        }
    }
    (theta, value)
}

/// Fits hyperparameters to `(xs, ys)` and returns the conditioned model.
///
/// The prior mean is fixed at the target mean. Starts whose Gram matrix
/// cannot be factored get their noise raised until it can.
///
/// Constant targets carry no information about scale or smoothness and the
/// likelihood then runs off to zero signal variance. In that case the fit
/// skips optimization and returns [`constant_data_hyperparams`].
pub fn gp_fit_xy(
    xs: &[Point],
    ys: &[f64],
    config: &FitConfig,
    rng: &mut RngStream,
) -> Result<GpModel> {
    if xs.len() < 2 {
        return Err(GpError::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.len() != ys.len() {
        return Err(GpError::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let dim = xs[0].len();
    if let Some(bad) = xs.iter().find(|x| x.len() != dim) {
        return Err(GpError::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let (mean, raw_var) = variance(ys);
    let widths = input_widths(xs);
    if raw_var <= 1e-12 * mean.abs().max(1.0).powi(2) {
        let hyper = constant_data_hyperparams(&widths, mean);
        return GpModel::new(xs.to_vec(), ys.to_vec(), hyper, config.jitter);
    }
    let y_var = raw_var.max(1e-12);
    let bounds = LogBounds::new(&widths, y_var);
    let obj = Objective {
        xs,
        ys,
        mean,
        jitter: config.jitter,
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..config.multistarts.max(1) {
        let mut theta: Vec<f64> = widths
            .iter()
            .map(|w| log_uniform(rng, 1e-2 * w, 1e1 * w))
            .collect();
        theta.push(log_uniform(rng, 1e-2 * y_var, 1e2 * y_var));
        theta.push(log_uniform(rng, 1e-8 * y_var, 1e-1 * y_var));
        bounds.project(&mut theta);
        let noise = dim + 1;
        while obj.value(&theta) == f64::NEG_INFINITY && theta[noise] < bounds.upper[noise] {
            theta[noise] = (theta[noise] + 100f64.ln()).min(bounds.upper[noise]);
        }
        if obj.value(&theta) == f64::NEG_INFINITY {
            continue;
        }
        let (theta, value) = ascend(&obj, &bounds, theta, config);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((theta, value));
        }
    }
    let (theta, _) = best.ok_or_else(|| {
        GpError::Linalg(crate::linalg::LinalgError::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })
    })?;
    let hyper = GpHyperparams::from_log_params(&theta, mean);
    GpModel::new(xs.to_vec(), ys.to_vec(), hyper, config.jitter)
}

/// Unit signal variance, length scales a fifth of the input widths and a
/// small noise floor.
pub fn constant_data_hyperparams(widths: &[f64], prior_mean: f64) -> GpHyperparams {
    GpHyperparams {
        length_scales: widths.iter().map(|w| 0.2 * w).collect(),
        signal_variance: 1.0,
        noise_variance: 1e-8,
        prior_mean,
    }
}

pub fn gp_fit(data: &Dataset, config: &FitConfig, rng: &mut RngStream) -> Result<GpModel> {
    gp_fit_xy(&data.points(), &data.values(), config, rng)
}
