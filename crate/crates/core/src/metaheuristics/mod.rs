//! Baseline samplers. Each encodes a different implicit assumption about
//! the fitness: none (random search), local continuity (annealing), strong
//! causality under recombination (genetic algorithm) and local quadratic
//! structure (the covariance-adapting evolution strategy).
//!
//! These are simplified teaching implementations, not reference versions of
//! the respective algorithm families. The GA and ES select by rank only, so
//! any strictly increasing transform of the fitness leaves their sequence of
//! evaluated points unchanged.

mod annealing;
mod evolution;
mod genetic;
mod random;

pub use annealing::{
    acceptance_probability, metropolis_accept, simulated_annealing, SaConfig, SimulatedAnnealing,
};
pub use evolution::{condition_estimate, evolution_strategy, EsConfig, EvolutionStrategy};
pub use genetic::{genetic_algorithm, uniform_crossover, GaConfig, GeneticAlgorithm};
pub use random::{random_search, RandomSearch};

/// Indices sorted best-first; equal values keep their original order.
pub(crate) fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or_else(|| values[a].is_nan().cmp(&values[b].is_nan()))
            .then(a.cmp(&b))
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_is_stable() {
        assert_eq!(rank_descending(&[1.0, 3.0, 3.0, 2.0]), vec![1, 2, 3, 0]);
        assert_eq!(rank_descending(&[f64::NAN, 0.0]), vec![1, 0]);
    }
}
