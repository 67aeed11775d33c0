//! The black-box oracle: only input/output pairs are observable, and every
//! call is counted against an optional budget.
//!
//! A [`FitnessFunction`] serves exactly one run. Its counter is a plain
//! integer behind `&mut self`; parallel runs each own their instance.

use thiserror::Error;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};

/// Failure inside an evaluator (as opposed to a misuse of the oracle).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluatorError {
    #[error("evaluator timed out after {millis} ms")]
    Timeout { millis: u64 },

    #[error("evaluator protocol violation: {0}")]
    Protocol(String),

    #[error("evaluator i/o failure: {0}")]
    Io(String),
}

/// Something that maps a point to a fitness value.
pub trait Objective: Send {
    fn value(&mut self, x: &[f64]) -> std::result::Result<f64, EvaluatorError>;
}

impl<F> Objective for F
where
    F: FnMut(&[f64]) -> f64 + Send,
{
    fn value(&mut self, x: &[f64]) -> std::result::Result<f64, EvaluatorError> {
        Ok(self(x))
    }
}

pub struct FitnessFunction {
    domain: BoxDomain,
    objective: Box<dyn Objective>,
    calls: usize,
    budget: Option<usize>,
    target: Option<f64>,
    target_hit: bool,
}

impl std::fmt::Debug for FitnessFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FitnessFunction")
            .field("domain", &self.domain)
            .field("calls", &self.calls)
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

impl FitnessFunction {
    pub fn new(domain: BoxDomain, objective: impl Objective + 'static) -> Self {
        Self {
            domain,
            objective: Box::new(objective),
            calls: 0,
            budget: None,
            target: None,
            target_hit: false,
        }
    }

    /// Caps the number of evaluations. A zero budget is treated as no evaluations allowed.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Refuses further calls with [`Error::TargetReached`] once a value
    /// `≥ target` has been returned. Drivers treat that as a normal stop.
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn call_count(&self) -> usize {
        self.calls
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.calls))
    }

    /// Evaluates `x`. The call counter advances only on a successful
    /// evaluation or an evaluator failure, never on a rejected call.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if let Some(budget) = self.budget {
            if self.calls >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        if self.target_hit {
            return Err(Error::TargetReached {
                target: self.target.unwrap_or(f64::NAN),
            });
        }
        self.domain.check_contains(x)?;
        self.calls += 1;
        let y = self.objective.value(x)?;
        if self.target.is_some_and(|t| y >= t) {
            self.target_hit = true;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> FitnessFunction {
        let d = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        FitnessFunction::new(d, |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn target_stops_further_calls() {
        let mut f = sphere().with_target(-0.5);
        assert!(f.evaluate(&[1.0, 1.0]).is_ok());
        assert_eq!(f.evaluate(&[0.1, 0.0]).unwrap(), -0.010000000000000002);
        assert!(matches!(
            f.evaluate(&[0.0, 0.0]),
            Err(Error::TargetReached { .. })
        ));
        assert_eq!(f.call_count(), 2);
    }

    #[test]
    fn counts_calls() {
        let mut f = sphere();
        assert_eq!(f.call_count(), 0);
        assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(f.call_count(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let mut f = sphere().with_budget(1);
        f.evaluate(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            f.evaluate(&[0.5, 0.5]),
            Err(Error::BudgetExhausted { budget: 1 })
        ));
        assert_eq!(f.call_count(), 1);
    }

    #[test]
    fn out_of_domain_rejected() {
        let d = BoxDomain::new(vec![0.0], vec![1.0]).unwrap();
        let mut f = FitnessFunction::new(d, |x: &[f64]| x[0]);
        assert!(matches!(
            f.evaluate(&[2.0]),
            Err(Error::OutOfDomain { dim: 0, .. })
        ));
        assert_eq!(f.call_count(), 0);
    }

    #[test]
    fn evaluator_errors_surface() {
        struct Broken;
        impl Objective for Broken {
            fn value(&mut self, _: &[f64]) -> std::result::Result<f64, EvaluatorError> {
                Err(EvaluatorError::Protocol("nan".into()))
            }
        }
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let mut f = FitnessFunction::new(d, Broken);
        assert!(matches!(f.evaluate(&[0.5]), Err(Error::Evaluator(_))));
    }
}
