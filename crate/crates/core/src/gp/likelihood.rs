use std::f64::consts::PI;

use super::{check_dim, noisy_gram_factor, GpError, GpHyperparams, Result};
use crate::domain::Point;
use crate::linalg::{self, DenseMatrix};

/// Log marginal likelihood and its gradient with respect to
/// `(ln φ_1 .. ln φ_n, ln σ_f², ln σ_n²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lml {
    pub value: f64,
    pub gradient: Vec<f64>,
}

fn validate(xs: &[Point], ys: &[f64], hyper: &GpHyperparams) -> Result<()> {
    hyper.validate()?;
    if xs.is_empty() {
        return Err(GpError::InsufficientData { needed: 1, got: 0 });
    }
    check_dim(xs.len(), ys.len())
}

fn value_from_factor(l: &DenseMatrix, centered: &[f64], alpha: &[f64]) -> f64 {
    let n = centered.len() as f64;
    let log_det_half: f64 = (0..l.rows()).map(|i| l[(i, i)].ln()).sum();
    -0.5 * linalg::dot(centered, alpha) - log_det_half - 0.5 * n * (2.0 * PI).ln()
}

/// Value only; skips the O(n³) inverse needed by the gradient.
pub fn log_marginal_likelihood_value(
    xs: &[Point],
    ys: &[f64],
    hyper: &GpHyperparams,
    jitter: f64,
) -> Result<f64> {
    validate(xs, ys, hyper)?;
    let (_, l) = noisy_gram_factor(xs, hyper, jitter)?;
    let centered: Vec<f64> = ys.iter().map(|y| y - hyper.prior_mean).collect();
    let alpha = linalg::cholesky_solve(&l, &centered)?;
    Ok(value_from_factor(&l, &centered, &alpha))
}

/// `(K + (σ_n² + jitter) I)⁻¹` from its Cholesky factor, for the gradient trace terms.
fn inverse_from_factor(l: &DenseMatrix) -> Result<DenseMatrix> {
    let n = l.rows();
    // Rows of L⁻¹ᵀ are columns of L⁻¹: solve L·c_j = e_j.
    let mut linv_cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        linv_cols.push(linalg::solve_lower(l, &e)?);
    }
    // (L⁻ᵀ L⁻¹)_{ij} = Σ_k L⁻¹_{ki} L⁻¹_{kj} = <col_i, col_j>; col_j is zero above row j.
    let mut inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = linalg::dot(&linv_cols[i][i..], &linv_cols[j][i..]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

pub fn log_marginal_likelihood(
    xs: &[Point],
    ys: &[f64],
    hyper: &GpHyperparams,
    jitter: f64,
) -> Result<Lml> {
    validate(xs, ys, hyper)?;
    let (k, l) = noisy_gram_factor(xs, hyper, jitter)?;
    let centered: Vec<f64> = ys.iter().map(|y| y - hyper.prior_mean).collect();
    let alpha = linalg::cholesky_solve(&l, &centered)?;
    let value = value_from_factor(&l, &centered, &alpha);

    // dL/dθ = ½ tr((ααᵀ − K_y⁻¹) ∂K_y/∂θ)
    let inv = inverse_from_factor(&l)?;
    let n = xs.len();
    let d = hyper.dim();
    let mut grad = vec![0.0; d + 2];
    let mut trace_q = 0.0;
    for i in 0..n {
        trace_q += alpha[i] * alpha[i] - inv[(i, i)];
        for j in 0..i {
            // Off-diagonal pairs appear twice in the symmetric trace.
            let q = 2.0 * (alpha[i] * alpha[j] - inv[(i, j)]);
            let kij = k[(i, j)];
            grad[d] += q * kij;
            for (g, ((a, b), ls)) in grad[..d]
                .iter_mut()
                .zip(xs[i].iter().zip(&xs[j]).zip(&hyper.length_scales))
            {
                let z = (a - b) / ls;
                *g += q * kij * z * z;
            }
        }
        grad[d] += (alpha[i] * alpha[i] - inv[(i, i)]) * k[(i, i)];
    }
    grad[d + 1] = hyper.noise_variance * trace_q;
    for g in &mut grad {
        *g *= 0.5;
    }
    Ok(Lml {
        value,
        gradient: grad,
    })
}
