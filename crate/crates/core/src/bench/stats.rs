//! Medians with DNF handling, the paired sign test, experiment summaries and
//! the dimensionality sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::landscapes::Landscape;
use super::runner::{run_experiment_with, AlgorithmSpec, ExperimentRow, RunOptions};

/// Median of evaluations-to-threshold with DNF counted as `budget + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredMedian {
    pub median: f64,
    pub runs: usize,
    pub dnf: usize,
}

impl CensoredMedian {
    /// More than half the runs failed; the median is then only a lower bound.
    pub fn dnf_majority(&self) -> bool {
        2 * self.dnf >= self.runs
    }

    pub fn defined(&self) -> Option<f64> {
        (!self.dnf_majority()).then_some(self.median)
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn censored_median(evals: &[Option<usize>], budget: usize) -> CensoredMedian {
    let mut v: Vec<f64> = evals
        .iter()
        .map(|e| e.unwrap_or(budget + 1) as f64)
        .collect();
    CensoredMedian {
        median: median(&mut v),
        runs: evals.len(),
        dnf: evals.iter().filter(|e| e.is_none()).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub pairs: usize,
    /// Pairs where the first sample needed fewer evaluations.
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    /// Exact two-sided binomial p-value with ties dropped.
    pub p_value: f64,
}

impl SignTest {
    pub fn a_significantly_better(&self, alpha: f64) -> bool {
        self.p_value <= alpha && self.wins_a > self.wins_b
    }
}

/// `P(X ≤ k)` for `X ~ Binomial(n, ½)`.
pub fn binomial_half_cdf(k: usize, n: usize) -> f64 {
    // Accumulate C(n, i)/2^n in log space so large n stays finite.
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut ln_c = 0.0f64;
    let mut total = 0.0;
    for i in 0..=k.min(n) {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        total += (ln_c - ln2n).exp();
    }
    total.min(1.0)
}

/// Paired two-sided sign test on evaluations-to-threshold, DNF as
/// `budget + 1`. Lower is better.
pub fn sign_test(a: &[Option<usize>], b: &[Option<usize>], budget: usize) -> Result<SignTest> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidConfig(
            "sign test needs two nonempty samples of equal length".into(),
        ));
    }
    let (mut wa, mut wb, mut ties) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        let x = x.unwrap_or(budget + 1);
        let y = y.unwrap_or(budget + 1);
        match x.cmp(&y) {
            std::cmp::Ordering::Less => wa += 1,
            std::cmp::Ordering::Greater => wb += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    let n = wa + wb;
    let p = if n == 0 {
        1.0
    } else {
        (2.0 * binomial_half_cdf(wa.min(wb), n)).min(1.0)
    };
    Ok(SignTest {
        pairs: a.len(),
        wins_a: wa,
        wins_b: wb,
        ties,
        p_value: p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: String,
    pub landscape: String,
    pub dimension: usize,
    pub runs: usize,
    pub successes: usize,
    /// `None` when more than half the runs did not finish.
    pub median_evals: Option<f64>,
    /// Median with DNF as `budget + 1`, always reported.
    pub censored_median_evals: f64,
    /// `"ok"` or `"DNF-majority"`.
    pub status: String,
    pub median_final_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub algorithm: String,
    pub baseline: String,
    pub landscape: String,
    pub dimension: usize,
    pub test: SignTest,
    /// `"better"`, `"worse"` or `"no significant difference"` at α = 0.05.
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub budget: usize,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
}

pub const SIGNIFICANCE: f64 = 0.05;

type CellKey = (String, String, usize);

fn cells(rows: &[ExperimentRow]) -> Vec<(CellKey, Vec<&ExperimentRow>)> {
    let mut out: Vec<(CellKey, Vec<&ExperimentRow>)> = Vec::new();
    for r in rows {
        let key = (r.algorithm.clone(), r.landscape.clone(), r.dimension);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => out.push((key, vec![r])),
        }
    }
    out
}

/// Per-cell medians, plus a sign test of every algorithm against `baseline`
/// on each landscape, paired by seed.
pub fn summarize(rows: &[ExperimentRow], budget: usize, baseline: &str) -> ExperimentSummary {
    let grouped = cells(rows);
    let mut summaries = Vec::new();
    for ((alg, land, dim), runs) in &grouped {
        let evals: Vec<Option<usize>> = runs.iter().map(|r| r.evals_to_threshold).collect();
        let m = censored_median(&evals, budget);
        let mut finals: Vec<f64> = runs.iter().map(|r| r.final_best).collect();
        summaries.push(CellSummary {
            algorithm: alg.clone(),
            landscape: land.clone(),
            dimension: *dim,
            runs: m.runs,
            successes: m.runs - m.dnf,
            median_evals: m.defined(),
            censored_median_evals: m.median,
            status: if m.dnf_majority() {
                "DNF-majority"
            } else {
                "ok"
            }
            .to_string(),
            median_final_best: median(&mut finals),
        });
    }
    let mut comparisons = Vec::new();
    for ((alg, land, dim), runs) in &grouped {
        if alg == baseline {
            continue;
        }
        let Some((_, base_runs)) = grouped
            .iter()
            .find(|((a, l, d), _)| a == baseline && l == land && d == dim)
        else {
            continue;
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for r in runs {
            if let Some(br) = base_runs.iter().find(|br| br.seed == r.seed) {
                a.push(r.evals_to_threshold);
                b.push(br.evals_to_threshold);
            }
        }
        let Ok(test) = sign_test(&a, &b, budget) else {
            continue;
        };
        let verdict = if test.p_value > SIGNIFICANCE {
            "no significant difference"
        } else if test.wins_a > test.wins_b {
            "better"
        } else {
            "worse"
        };
        comparisons.push(Comparison {
            algorithm: alg.clone(),
            baseline: baseline.to_string(),
            landscape: land.clone(),
            dimension: *dim,
            test,
            verdict: verdict.to_string(),
        });
    }
    ExperimentSummary {
        budget,
        cells: summaries,
        comparisons,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dimension: usize,
    pub runs: usize,
    pub dnf: usize,
    /// DNF counted as `budget + 1`.
    pub median_evals: f64,
    pub dnf_majority: bool,
}

/// Median evaluations-to-threshold of `algorithm` on `family(d)` for each
/// `d` in `dims` (which must be ascending).
pub fn dimensionality_sweep(
    algorithm: &AlgorithmSpec,
    family: &dyn Fn(usize) -> Result<Landscape>,
    dims: &[usize],
    seeds: &[u64],
    budget: usize,
    options: &RunOptions,
) -> Result<Vec<SweepRow>> {
    if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "dimensions must be nonempty and strictly ascending".into(),
        ));
    }
    let mut out = Vec::with_capacity(dims.len());
    for &d in dims {
        let land = family(d)?;
        let rows = run_experiment_with(
            std::slice::from_ref(algorithm),
            &[land],
            seeds,
            budget,
            options,
        )?;
        let evals: Vec<Option<usize>> = rows.iter().map(|r| r.evals_to_threshold).collect();
        let m = censored_median(&evals, budget);
        out.push(SweepRow {
            dimension: d,
            runs: m.runs,
            dnf: m.dnf,
            median_evals: m.median,
            dnf_majority: m.dnf_majority(),
        });
    }
    Ok(out)
}
