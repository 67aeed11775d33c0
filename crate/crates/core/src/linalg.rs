//! Dense symmetric positive-definite factorization and triangular solves.
//!
//! Only factor-and-solve is exposed; there is deliberately no inverse.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("zero diagonal entry at row {row}")]
    SingularDiagonal { row: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

const SYMMETRY_TOL: f64 = 1e-12;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.data.len(),
                actual: other.data.len(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    fn check_symmetric(&self) -> Result<()> {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..self.rows {
            for j in 0..i {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * scale || a.is_nan() || b.is_nan() {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `1e-10 * trace(a) / rows`, the conventional numerical noise floor.
pub fn default_jitter(a: &DenseMatrix) -> f64 {
    if a.rows == 0 {
        return 0.0;
    }
    1e-10 * a.trace().abs() / a.rows as f64
}

/// Lower-triangular `L` with `L Lᵀ = a + jitter·I`.
pub fn cholesky(a: &DenseMatrix, jitter: f64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    a.check_symmetric()?;
    let n = a.rows;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let (head, tail) = l.data.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        for i in 0..j {
            let row_i = &head[i * n..i * n + n];
            let s = a[(j, i)] - dot(&row_i[..i], &row_j[..i]);
            row_j[i] = s / row_i[i];
        }
        let pivot = a[(j, j)] + jitter - dot(&row_j[..j], &row_j[..j]);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite {
                pivot: j,
                value: pivot,
            });
        }
        row_j[j] = pivot.sqrt();
    }
    Ok(l)
}

/// Forward substitution: `x` with `l·x = b`. Only the lower triangle of `l` is read.
pub fn solve_lower(l: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_triangular_system(l, b)?;
    let n = l.rows;
    let mut x = vec![0.0; n];
    for i in 0..n {
        let row = l.row(i);
        let d = row[i];
        if d == 0.0 {
            return Err(LinalgError::SingularDiagonal { row: i });
        }
        x[i] = (b[i] - dot(&row[..i], &x[..i])) / d;
    }
    Ok(x)
}

/// Back substitution: `x` with `lᵀ·x = b`, `l` lower-triangular.
pub fn solve_lower_transpose(l: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_triangular_system(l, b)?;
    let n = l.rows;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let d = l[(i, i)];
        if d == 0.0 {
            return Err(LinalgError::SingularDiagonal { row: i });
        }
        x[i] /= d;
        let xi = x[i];
        let row = l.row(i);
        for k in 0..i {
            x[k] -= row[k] * xi;
        }
    }
    Ok(x)
}

fn check_triangular_system(l: &DenseMatrix, b: &[f64]) -> Result<()> {
    if !l.is_square() {
        return Err(LinalgError::NotSquare {
            rows: l.rows,
            cols: l.cols,
        });
    }
    if b.len() != l.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: l.rows,
            actual: b.len(),
        });
    }
    Ok(())
}

/// Solves `(a + jitter·I)·x = b` by Cholesky and two triangular solves.
pub fn solve_spd(a: &DenseMatrix, b: &[f64], jitter: f64) -> Result<Vec<f64>> {
    let l = cholesky(a, jitter)?;
    cholesky_solve(&l, b)
}

/// Solves `L Lᵀ x = b` given the factor `l`.
pub fn cholesky_solve(l: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let z = solve_lower(l, b)?;
    solve_lower_transpose(l, &z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn random_spd(n: usize, rng: &mut RngStream) -> DenseMatrix {
        let m =
            DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.normal()).collect()).unwrap();
        let mut a = m.transpose().matmul(&m).unwrap();
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        a
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_factor() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(cholesky(&i3, 0.0).unwrap(), i3);
        assert_eq!(
            solve_lower(&i3, &[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            solve_spd(&i3, &[1.0, -2.0, 3.0], 0.0).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
    }

    #[test]
    fn two_by_two_factor() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let l = cholesky(&a, 0.0).unwrap();
        let expect = [2.0, 0.0, 1.0, 2f64.sqrt()];
        for (got, want) in l.as_slice().iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
        let rebuilt = l.matmul(&l.transpose()).unwrap();
        assert!(rebuilt.sub(&a).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn indefinite_rejected() {
        // eigenvalues 3 and -1
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&a, 0.0),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn shape_errors() {
        let r = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            cholesky(&r, 0.0),
            Err(LinalgError::NotSquare { .. })
        ));
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&a, 0.0),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn jitter_rescues_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(cholesky(&a, 0.0).is_err());
        let j = default_jitter(&a);
        assert_eq!(j, 1e-10);
        assert!(cholesky(&a, j).is_ok());
    }

    #[test]
    fn forward_substitution_by_hand() {
        let s = 2f64.sqrt();
        let l = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, s]]).unwrap();
        let x = solve_lower(&l, &[2.0, 1.0 + s]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_is_singular() {
        let l = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(
            solve_lower(&l, &[1.0, 1.0]),
            Err(LinalgError::SingularDiagonal { row: 1 })
        );
    }

    #[test]
    fn spd_solve_by_substitution() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let x = solve_spd(&a, &[8.0, 8.0], 0.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        // a·(1.25, 1.5) = (8, 7)
        let x = solve_spd(&a, &[8.0, 7.0], 0.0).unwrap();
        assert!((x[0] - 1.25).abs() < 1e-14 && (x[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn random_spd_reconstruction_and_residual() {
        let mut rng = RngStream::new(11);
        for n in [1, 2, 5, 20, 35, 50] {
            let a = random_spd(n, &mut rng);
            let l = cholesky(&a, 0.0).unwrap();
            let rel = l
                .matmul(&l.transpose())
                .unwrap()
                .sub(&a)
                .unwrap()
                .frobenius_norm()
                / a.frobenius_norm();
            assert!(rel < 1e-10, "n={n} reconstruction {rel:e}");

            let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let x = solve_spd(&a, &b, 0.0).unwrap();
            let ax = a.matvec(&x).unwrap();
            let r: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
            let limit = if n == 20 { 1e-10 } else { 1e-9 };
            assert!(norm(&r) / norm(&b) < limit, "n={n} residual");
        }
    }

    #[test]
    fn transpose_solve_matches_definition() {
        let mut rng = RngStream::new(5);
        let a = random_spd(6, &mut rng);
        let l = cholesky(&a, 0.0).unwrap();
        let b: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
        let x = solve_lower_transpose(&l, &b).unwrap();
        let back = l.transpose().matvec(&x).unwrap();
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
