use serde::{Deserialize, Serialize};

use crate::algorithm::{run_sampler, Sampler};
use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::rng::RngStream;
use crate::trace::{Dataset, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub initial_temp: f64,
    /// Geometric factor applied to the temperature after every step.
    pub cooling_rate: f64,
    /// Gaussian step size as a fraction of each domain width.
    pub step_scale: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            initial_temp: 1.0,
            cooling_rate: 0.95,
            step_scale: 0.1,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temp > 0.0) {
            return Err(Error::InvalidConfig("initial_temp must be positive".into()));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::InvalidConfig(
                "cooling_rate must lie in (0, 1)".into(),
            ));
        }
        if !(self.step_scale > 0.0) {
            return Err(Error::InvalidConfig("step_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Metropolis rule for maximization: 1 if `delta ≥ 0`, else `exp(delta / temp)`.
pub fn acceptance_probability(delta: f64, temp: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else if temp > 0.0 {
        (delta / temp).exp()
    } else {
        0.0
    }
}

/// Draws the accept/reject decision. Improvements consume no randomness.
pub fn metropolis_accept(delta: f64, temp: f64, rng: &mut RngStream) -> bool {
    delta >= 0.0 || rng.uniform() < acceptance_probability(delta, temp)
}

#[derive(Debug, Clone)]
pub struct SimulatedAnnealing {
    config: SaConfig,
    domain: Option<BoxDomain>,
    current: Option<(Point, f64)>,
    temp: f64,
}

impl SimulatedAnnealing {
    pub fn new(config: SaConfig) -> Result<Self> {
        config.validate()?;
        let temp = config.initial_temp;
        Ok(Self {
            config,
            domain: None,
            current: None,
            temp,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temp
    }

    pub fn current(&self) -> Option<&(Point, f64)> {
        self.current.as_ref()
    }
}

impl Sampler for SimulatedAnnealing {
    fn name(&self) -> &'static str {
        "sa"
    }

    fn initialize(&mut self, domain: &BoxDomain) -> Result<()> {
        self.domain = Some(domain.clone());
        self.current = None;
        self.temp = self.config.initial_temp;
        Ok(())
    }

    fn step(&mut self, data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>> {
        let domain = self.domain.as_ref().ok_or(Error::StateNotInitialized)?;
        let Some(last) = data.records().last() else {
            let u: Vec<f64> = (0..domain.dim()).map(|_| rng.uniform()).collect();
            return Ok(vec![domain.from_unit(&u)]);
        };
        match &self.current {
            None => self.current = Some((last.x.clone(), last.y)),
            Some((_, y_cur)) => {
                if metropolis_accept(last.y - y_cur, self.temp, rng) {
                    self.current = Some((last.x.clone(), last.y));
                }
                self.temp *= self.config.cooling_rate;
            }
        }
        let (x, _) = self.current.as_ref().expect("set above");
        let proposal = x
            .iter()
            .enumerate()
            .map(|(d, v)| v + self.config.step_scale * domain.width(d) * rng.normal())
            .collect();
        Ok(vec![proposal])
    }
}

pub fn simulated_annealing(
    f: &mut FitnessFunction,
    config: &SaConfig,
    budget: usize,
    rng: &mut RngStream,
) -> Result<RunTrace> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    let mut sa = SimulatedAnnealing::new(config.clone())?;
    run_sampler(&mut sa, f, rng, Some(budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_formula() {
        assert_eq!(acceptance_probability(0.0, 1.0), 1.0);
        assert_eq!(acceptance_probability(2.5, 1e-9), 1.0);
        assert!((acceptance_probability(-1.0, 1.0) - (-1f64).exp()).abs() < 1e-16);
        assert!((acceptance_probability(-1.0, 1.0) - 0.36788).abs() < 1e-5);
        assert_eq!(acceptance_probability(-1.0, 0.0), 0.0);
    }

    #[test]
    fn cold_rejection_frequency() {
        let mut temp = 1.0;
        for _ in 0..500 {
            temp *= 0.95;
        }
        let mut rng = RngStream::new(1);
        let accepted = (0..100_000)
            .filter(|_| metropolis_accept(-0.01, temp, &mut rng))
            .count();
        assert!((accepted as f64) / 1e5 < 0.001);
    }

    #[test]
    fn config_bounds() {
        assert!(SaConfig {
            cooling_rate: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SaConfig {
            initial_temp: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SaConfig {
            step_scale: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
