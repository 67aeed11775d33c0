//! The unified sampler interface: every optimizer maps the samples seen so
//! far (plus its private random stream) to a batch of new points.

use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::rng::RngStream;
use crate::trace::{Dataset, Record, RunTrace};

pub trait Sampler {
    fn name(&self) -> &'static str;

    /// Binds the sampler to `domain` and clears any state from a previous run.
    fn initialize(&mut self, domain: &BoxDomain) -> Result<()>;

    /// Proposes at least one new point. `data` holds every evaluation of the
    /// current run in order, including the results of the previous batch.
    /// Proposals may fall outside the domain; the driver clamps them.
    fn step(&mut self, data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>>;
}

/// Runs `sampler` against `fitness` until `max_evals` evaluations or the
/// fitness budget run out, whichever comes first.
///
/// A run that ends on the fitness budget or target is a normal termination. Every
/// proposal is clamped to the domain before evaluation and the clamp is
/// recorded on the resulting [`Record`].
pub fn run_sampler(
    sampler: &mut dyn Sampler,
    fitness: &mut FitnessFunction,
    rng: &mut RngStream,
    max_evals: Option<usize>,
) -> Result<RunTrace> {
    let limit = match (max_evals, fitness.remaining()) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::InvalidConfig(
                "a run needs either an evaluation limit or a fitness budget".into(),
            ))
        }
    };
    let domain = fitness.domain().clone();
    sampler.initialize(&domain)?;
    let mut trace = RunTrace::new(rng.seed());
    while trace.len() < limit {
        let batch = sampler.step(&trace.dataset, rng)?;
        if batch.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{} proposed an empty batch",
                sampler.name()
            )));
        }
        for mut x in batch {
            if trace.len() >= limit {
                break;
            }
            domain.check_dim(&x)?;
            let clamped = domain.clamp(&mut x);
            match fitness.evaluate(&x) {
                Ok(y) => trace.push(Record { x, y, clamped }),
                Err(Error::BudgetExhausted { .. } | Error::TargetReached { .. }) => {
                    return Ok(trace)
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Wild;

    impl Sampler for Wild {
        fn name(&self) -> &'static str {
            "wild"
        }
        fn initialize(&mut self, _: &BoxDomain) -> Result<()> {
            Ok(())
        }
        fn step(&mut self, _: &Dataset, _: &mut RngStream) -> Result<Vec<Point>> {
            Ok(vec![vec![5.0], vec![0.5], vec![-5.0]])
        }
    }

    #[test]
    fn clamps_and_records() {
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let mut f = FitnessFunction::new(d, |x: &[f64]| x[0]).with_budget(5);
        let trace = run_sampler(&mut Wild, &mut f, &mut RngStream::new(1), None).unwrap();
        assert_eq!(trace.len(), 5);
        let flags: Vec<bool> = trace.dataset.records().iter().map(|r| r.clamped).collect();
        assert_eq!(flags, vec![true, false, true, true, false]);
        assert_eq!(trace.dataset.records()[0].x, vec![1.0]);
        assert_eq!(f.call_count(), 5);
    }

    #[test]
    fn unbounded_run_is_rejected() {
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let mut f = FitnessFunction::new(d, |x: &[f64]| x[0]);
        assert!(run_sampler(&mut Wild, &mut f, &mut RngStream::new(1), None).is_err());
    }

    #[test]
    fn max_evals_truncates_mid_batch() {
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let mut f = FitnessFunction::new(d, |x: &[f64]| x[0]).with_budget(100);
        let trace = run_sampler(&mut Wild, &mut f, &mut RngStream::new(1), Some(4)).unwrap();
        assert_eq!(trace.len(), 4);
    }
}
