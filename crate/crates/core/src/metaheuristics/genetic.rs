use serde::{Deserialize, Serialize};

use super::rank_descending;
use crate::algorithm::{run_sampler, Sampler};
use crate::domain::{BoxDomain, Point};
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::rng::RngStream;
use crate::trace::{Dataset, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Gaussian mutation scale as a fraction of each domain width.
    pub mutation_sigma: f64,
    pub elitism: usize,
    pub tournament_size: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            crossover_rate: 0.9,
            mutation_rate: 0.25,
            mutation_sigma: 0.05,
            elitism: 1,
            tournament_size: 3,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.population == 0 || self.population % 2 != 0 {
            return bad("population must be a positive even number");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return bad("crossover_rate and mutation_rate must lie in [0, 1]");
        }
        if !(self.mutation_sigma > 0.0) {
            return bad("mutation_sigma must be positive");
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population");
        }
        if self.tournament_size == 0 || self.tournament_size > self.population {
            return bad("tournament_size must be in 1..=population");
        }
        Ok(())
    }
}

/// Gene-wise coin flips between two parents; the second child takes the
/// complementary genes.
pub fn uniform_crossover(a: &[f64], b: &[f64], rng: &mut RngStream) -> (Point, Point) {
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&ga, &gb) in a.iter().zip(b) {
        if rng.uniform() < 0.5 {
            c1.push(ga);
            c2.push(gb);
        } else {
            c1.push(gb);
            c2.push(ga);
        }
    }
    (c1, c2)
}

/// Generational GA with tournament selection, uniform crossover, Gaussian
/// mutation and elitism. Elites survive unchanged and are not re-evaluated,
/// so after the first generation each step proposes `population − elitism`
/// offspring.
#[derive(Debug, Clone)]
pub struct GeneticAlgorithm {
    config: GaConfig,
    domain: Option<BoxDomain>,
    population: Vec<(Point, f64)>,
    elites: Vec<(Point, f64)>,
    pending_from: Option<usize>,
    generation_best: Vec<f64>,
}

impl GeneticAlgorithm {
    pub fn new(config: GaConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            domain: None,
            population: Vec::new(),
            elites: Vec::new(),
            pending_from: None,
            generation_best: Vec::new(),
        })
    }

    /// Best fitness in each completed generation's population.
    pub fn generation_best(&self) -> &[f64] {
        &self.generation_best
    }

    fn tournament(&self, rng: &mut RngStream) -> usize {
        let mut winner = rng.below(self.population.len());
        for _ in 1..self.config.tournament_size {
            let c = rng.below(self.population.len());
            let (yc, yw) = (self.population[c].1, self.population[winner].1);
            if yc > yw || (yc == yw && c < winner) {
                winner = c;
            }
        }
        winner
    }

    fn mutate(&self, x: &mut [f64], domain: &BoxDomain, rng: &mut RngStream) {
        for (d, v) in x.iter_mut().enumerate() {
            if rng.uniform() < self.config.mutation_rate {
                *v += self.config.mutation_sigma * domain.width(d) * rng.normal();
            }
        }
        domain.clamp(x);
    }
}

impl Sampler for GeneticAlgorithm {
    fn name(&self) -> &'static str {
        "ga"
    }

    fn initialize(&mut self, domain: &BoxDomain) -> Result<()> {
        self.domain = Some(domain.clone());
        self.population.clear();
        self.elites.clear();
        self.pending_from = None;
        self.generation_best.clear();
        Ok(())
    }

    fn step(&mut self, data: &Dataset, rng: &mut RngStream) -> Result<Vec<Point>> {
        let domain = self.domain.clone().ok_or(Error::StateNotInitialized)?;
        let Some(from) = self.pending_from else {
            self.pending_from = Some(data.len());
            let initial = (0..self.config.population)
                .map(|_| {
                    let u: Vec<f64> = (0..domain.dim()).map(|_| rng.uniform()).collect();
                    domain.from_unit(&u)
                })
                .collect();
            return Ok(initial);
        };

        self.population = std::mem::take(&mut self.elites);
        self.population
            .extend(data.tail(from).iter().map(|r| (r.x.clone(), r.y)));
        let values: Vec<f64> = self.population.iter().map(|p| p.1).collect();
        let order = rank_descending(&values);
        self.generation_best.push(values[order[0]]);
        self.elites = order[..self.config.elitism]
            .iter()
            .map(|&i| self.population[i].clone())
            .collect();

        let wanted = self.config.population - self.config.elitism;
        let mut children = Vec::with_capacity(wanted + 1);
        while children.len() < wanted {
            let a = self.tournament(rng);
            let b = self.tournament(rng);
            let (mut c1, mut c2) = if rng.uniform() < self.config.crossover_rate {
                uniform_crossover(&self.population[a].0, &self.population[b].0, rng)
            } else {
                (self.population[a].0.clone(), self.population[b].0.clone())
            };
            self.mutate(&mut c1, &domain, rng);
            self.mutate(&mut c2, &domain, rng);
            children.push(c1);
            children.push(c2);
        }
        children.truncate(wanted);
        self.pending_from = Some(data.len());
        Ok(children)
    }
}

pub fn genetic_algorithm(
    f: &mut FitnessFunction,
    config: &GaConfig,
    budget: usize,
    rng: &mut RngStream,
) -> Result<RunTrace> {
    config.validate()?;
    if budget < config.population {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} is smaller than the population {}",
            config.population
        )));
    }
    let mut ga = GeneticAlgorithm::new(config.clone())?;
    run_sampler(&mut ga, f, rng, Some(budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_parents_give_identical_children() {
        let mut rng = RngStream::new(0);
        let p = vec![0.3, -1.2, 4.0];
        for _ in 0..20 {
            let (a, b) = uniform_crossover(&p, &p, &mut rng);
            assert_eq!(a, p);
            assert_eq!(b, p);
        }
    }

    #[test]
    fn crossover_children_are_complementary() {
        let mut rng = RngStream::new(1);
        let (a, b) = uniform_crossover(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0], &mut rng);
        for i in 0..4 {
            assert_eq!(a[i] + b[i], [6.0, 8.0, 10.0, 12.0][i]);
        }
    }

    #[test]
    fn config_invariants() {
        assert!(GaConfig {
            population: 7,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            elitism: 20,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            tournament_size: 21,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            mutation_rate: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
