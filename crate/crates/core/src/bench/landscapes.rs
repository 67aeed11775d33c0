//! Test landscapes, all in the maximization convention.
//!
//! | name        | domain            | known best | default threshold |
//! |-------------|-------------------|------------|-------------------|
//! | sphere      | `[-5, 5]^d`       | 0 at 0     | -0.01             |
//! | rastrigin   | `[-5.12, 5.12]^d` | 0 at 0     | -1.0              |
//! | needle      | `[0, 1]^d`        | 1 at `c`   | 1.0               |
//! | step        | `[-5, 5]^d`       | 0 at `c`   | 0.0               |
//! | ellipsoid   | `[-5, 5]^d`       | 0 at 0     | -0.01             |
//!
//! `c` is an interior point with irrational coordinates,
//! `c_i = lo + (hi − lo)·(0.2 + 0.6·frac((i + 1)·g))` with `g = (√5 − 1)/2`,
//! so that it never lines up with grid-like designs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;

const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_8;

/// Plateau edge length of the step landscape.
pub const STEP_CELL: f64 = 2.0;
/// Drop across the step landscape's ridge.
pub const STEP_JUMP: f64 = 10.0;
/// The ridge sits `STEP_RIDGE_CELLS` cells above `c_0` along the first axis,
/// in the middle of a plateau.
pub const STEP_RIDGE_CELLS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LandscapeKind {
    Sphere,
    Rastrigin,
    Needle { width: f64 },
    Step,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landscape {
    pub name: String,
    pub dimension: usize,
    pub domain: BoxDomain,
    pub known_best: f64,
    pub threshold: f64,
    /// Location at which `known_best` is attained.
    pub optimizer: Point,
    pub kind: LandscapeKind,
}

fn interior_point(domain: &BoxDomain) -> Point {
    (0..domain.dim())
        .map(|i| {
            let frac = ((i + 1) as f64 * GOLDEN_FRACTION).fract();
            domain.lower()[i] + domain.width(i) * (0.2 + 0.6 * frac)
        })
        .collect()
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidConfig(
            "landscape dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `−Σ x_i²`.
pub fn sphere(d: usize) -> Result<Landscape> {
    check_dim(d)?;
    Ok(Landscape {
        name: "sphere".into(),
        dimension: d,
        domain: BoxDomain::cube(d, -5.0, 5.0)?,
        known_best: 0.0,
        threshold: -0.01,
        optimizer: vec![0.0; d],
        kind: LandscapeKind::Sphere,
    })
}

/// `−(10d + Σ (x_i² − 10 cos 2πx_i))`.
pub fn rastrigin(d: usize) -> Result<Landscape> {
    check_dim(d)?;
    Ok(Landscape {
        name: "rastrigin".into(),
        dimension: d,
        domain: BoxDomain::cube(d, -5.12, 5.12)?,
        known_best: 0.0,
        threshold: -1.0,
        optimizer: vec![0.0; d],
        kind: LandscapeKind::Rastrigin,
    })
}

/// 1 inside the open ∞-norm ball of radius `width` around `c`, 0 elsewhere.
/// The peak occupies a `(2·width)^d` fraction of the unit cube.
pub fn needle(d: usize, width: f64) -> Result<Landscape> {
    check_dim(d)?;
    let domain = BoxDomain::cube(d, 0.0, 1.0)?;
    let c = interior_point(&domain);
    let interior = c.iter().all(|&ci| ci - width > 0.0 && ci + width < 1.0);
    if !(width > 0.0) || !interior {
        return Err(Error::InvalidConfig(format!(
            "needle width {width} must be positive and keep the peak inside the unit cube"
        )));
    }
    Ok(Landscape {
        name: "needle".into(),
        dimension: d,
        domain,
        known_best: 1.0,
        threshold: 1.0,
        optimizer: c,
        kind: LandscapeKind::Needle { width },
    })
}

/// The bowl `−‖x − c‖²` read off at the centre of the `STEP_CELL`-sized
/// plateau containing `x`, minus `STEP_JUMP` beyond a ridge across the first
/// axis. The plateau around `c` (value 0) is the unique best one.
pub fn step_discontinuous(d: usize) -> Result<Landscape> {
    check_dim(d)?;
    let domain = BoxDomain::cube(d, -5.0, 5.0)?;
    let c = interior_point(&domain);
    Ok(Landscape {
        name: "step".into(),
        dimension: d,
        domain,
        known_best: 0.0,
        threshold: 0.0,
        optimizer: c,
        kind: LandscapeKind::Step,
    })
}

/// `−Σ 100^{i/(d−1)} x_i²`; in two dimensions `−(x_1² + 100·x_2²)`.
pub fn ellipsoid(d: usize) -> Result<Landscape> {
    check_dim(d)?;
    Ok(Landscape {
        name: "ellipsoid".into(),
        dimension: d,
        domain: BoxDomain::cube(d, -5.0, 5.0)?,
        known_best: 0.0,
        threshold: -0.01,
        optimizer: vec![0.0; d],
        kind: LandscapeKind::Ellipsoid,
    })
}

/// Builds a landscape by name (`needle` uses `needle_width`).
pub fn landscape_by_name(name: &str, d: usize, needle_width: f64) -> Result<Landscape> {
    match name {
        "sphere" => sphere(d),
        "rastrigin" => rastrigin(d),
        "needle" => needle(d, needle_width),
        "step" => step_discontinuous(d),
        "ellipsoid" => ellipsoid(d),
        other => Err(Error::InvalidConfig(format!("unknown landscape {other}"))),
    }
}

impl Landscape {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Integer plateau coordinates of `x` on the step landscape.
    pub fn step_cell(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.optimizer)
            .map(|(v, c)| ((v - c) / STEP_CELL + 0.5).floor() as i64)
            .collect()
    }

    pub fn step_ridge(&self) -> f64 {
        self.optimizer[0] + STEP_RIDGE_CELLS * STEP_CELL
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match &self.kind {
            LandscapeKind::Sphere => -x.iter().map(|v| v * v).sum::<f64>(),
            LandscapeKind::Rastrigin => {
                let s: f64 = x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum();
                -(10.0 * x.len() as f64 + s)
            }
            LandscapeKind::Needle { width } => {
                let inside = x
                    .iter()
                    .zip(&self.optimizer)
                    .all(|(v, c)| (v - c).abs() < *width);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            LandscapeKind::Step => {
                let bowl: f64 = self
                    .step_cell(x)
                    .iter()
                    .map(|&k| {
                        let r = k as f64 * STEP_CELL;
                        r * r
                    })
                    .sum();
                let cliff = if x[0] > self.step_ridge() {
                    STEP_JUMP
                } else {
                    0.0
                };
                -bowl - cliff
            }
            LandscapeKind::Ellipsoid => {
                let d = x.len();
                x.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let w = if d == 1 {
                            1.0
                        } else {
                            100f64.powf(i as f64 / (d - 1) as f64)
                        };
                        -w * v * v
                    })
                    .sum()
            }
        }
    }

    /// A fresh oracle for one run.
    pub fn fitness(&self) -> FitnessFunction {
        let me = self.clone();
        FitnessFunction::new(self.domain.clone(), move |x: &[f64]| me.evaluate(x))
    }
}
