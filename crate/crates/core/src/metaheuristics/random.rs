use crate::algorithm::{run_sampler, Sampler};
use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::rng::RngStream;
use crate::trace::{Dataset, RunTrace};

/// One i.i.d. uniform point per step.
#[derive(Debug, Clone, Default)]
pub struct RandomSearch {
    domain: Option<BoxDomain>,
}

impl RandomSearch {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Sampler for RandomSearch {
    fn name(&self) -> &'static str {
        "random"
    }

    fn initialize(&mut self, domain: &BoxDomain) -> Result<()> {
        self.domain = Some(domain.clone());
        Ok(())
    }

    fn step(&mut self, _data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>> {
        let d = self.domain.as_ref().ok_or(Error::StateNotInitialized)?;
        let x = (0..d.dim())
            .map(|i| rng.uniform_in(d.lower()[i], d.upper()[i]))
            .collect();
        Ok(vec![x])
    }
}

pub fn random_search(
    f: &mut FitnessFunction,
    budget: usize,
    rng: &mut RngStream,
) -> Result<RunTrace> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    run_sampler(&mut RandomSearch::new(), f, rng, Some(budget))
}
