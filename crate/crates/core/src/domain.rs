use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the search space.
pub type Point = Vec<f64>;

/// Axis-aligned hyper-rectangle `[lower_i, upper_i]` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawDomain> for BoxDomain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        BoxDomain::new(raw.lower, raw.upper)
    }
}

impl From<BoxDomain> for RawDomain {
    fn from(d: BoxDomain) -> Self {
        RawDomain {
            lower: d.lower,
            upper: d.upper,
        }
    }
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lower.len().max(1),
                actual: upper.len(),
            });
        }
        for (dim, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // `!(lo < hi)` also rejects NaN bounds.
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::EmptyInterval {
                    dim,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, dim: usize) -> f64 {
        self.upper[dim] - self.lower[dim]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn center(&self) -> Point {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Fails with `OutOfDomain` naming the first offending coordinate.
    pub fn check_contains(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        for (dim, (&v, (&lo, &hi))) in x.iter().zip(self.lower.iter().zip(&self.upper)).enumerate()
        {
            if !(lo <= v && v <= hi) {
                return Err(Error::OutOfDomain { dim, value: v });
            }
        }
        Ok(())
    }

    /// Projects `x` onto the box. Returns whether any coordinate moved.
    /// NaN coordinates are sent to the lower bound.
    pub fn clamp(&self, x: &mut [f64]) -> bool {
        let mut moved = false;
        for (v, (&lo, &hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            let c = if v.is_nan() { lo } else { v.clamp(lo, hi) };
            if c != *v || v.is_nan() {
                moved = true;
            }
            *v = c;
        }
        moved
    }

    /// Maps a point of the unit cube onto the box.
    pub fn from_unit(&self, u: &[f64]) -> Point {
        u.iter()
            .enumerate()
            .map(|(i, &t)| self.lower[i] + t * self.width(i))
            .collect()
    }

    /// Inverse of [`from_unit`](Self::from_unit).
    pub fn to_unit(&self, x: &[f64]) -> Point {
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.lower[i]) / self.width(i))
            .collect()
    }
}
