use serde::{Deserialize, Serialize};

use crate::neat::{DistanceCoefficients, MutationParams};
use crate::physics::PhysicsParams;
use crate::{Error, Result};

/// Parameters of one evolutionary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Number of evaluated generations; zero still evaluates and archives
    /// the initial population.
    pub generations: usize,
    pub population: usize,
    /// Side of the square robot grid.
    pub robot_size: usize,
    /// Independent runs per experiment; used by drivers that sweep seeds.
    pub repetitions: usize,
    /// Species membership threshold on the hybrid distance.
    pub compat_threshold: f64,
    /// Weight of the body distance in the hybrid distance.
    #[serde(alias = "v")]
    pub body_coefficient: f64,
    pub distance: DistanceCoefficients,
    pub mutation: MutationParams,
    pub max_stagnation: usize,
    pub species_elitism: usize,
    pub elitism: usize,
    pub survival_threshold: f64,
    pub min_species_size: usize,
    /// Share of non-elite offspring produced by crossover; the rest are
    /// mutated clones.
    pub crossover_fraction: f64,
    pub seed: u64,
    /// Overrides the task's episode length.
    pub horizon: Option<usize>,
    /// Stop once this many episodes have been run.
    pub max_evaluations: Option<u64>,
    pub nested: NestedConfig,
    pub physics: PhysicsParams,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            generations: 250,
            population: 128,
            robot_size: 5,
            repetitions: 5,
            compat_threshold: 3.5,
            body_coefficient: 1.0,
            distance: DistanceCoefficients::default(),
            mutation: MutationParams::default(),
            max_stagnation: 20,
            species_elitism: 1,
            elitism: 2,
            survival_threshold: 0.25,
            min_species_size: 4,
            crossover_fraction: 0.75,
            seed: 0,
            horizon: None,
            max_evaluations: None,
            nested: NestedConfig::default(),
            physics: PhysicsParams::default(),
        }
    }
}

/// Sizes of the nested-loop baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NestedConfig {
    /// Morphology population; the outer loop runs for `generations`.
    pub population: usize,
    /// Controller population evolved for every new body.
    pub inner_population: usize,
    pub inner_generations: usize,
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self { population: 12, inner_population: 12, inner_generations: 8 }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let mut rates = vec![
            ("survival_threshold", self.survival_threshold),
            ("crossover_fraction", self.crossover_fraction),
        ];
        rates.extend(self.mutation.rates());
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} = {r} is not in [0, 1]")));
            }
        }
        if self.mutation.weight_mutate_rate + self.mutation.weight_replace_rate > 1.0 + 1e-12
            || self.mutation.bias_mutate_rate + self.mutation.bias_replace_rate > 1.0 + 1e-12
        {
            return Err(Error::Config("mutate and replace rates of one value must sum to at most 1".into()));
        }
        if self.min_species_size == 0 {
            return Err(Error::Config("min_species_size must be positive".into()));
        }
        for (name, size) in [
            ("population", self.population),
            ("nested.population", self.nested.population),
            ("nested.inner_population", self.nested.inner_population),
        ] {
            if size < 2 * self.min_species_size {
                return Err(Error::Config(format!(
                    "{name} = {size} is below twice min_species_size ({})",
                    self.min_species_size
                )));
            }
        }
        if self.robot_size == 0 {
            return Err(Error::Config("robot_size must be positive".into()));
        }
        if !(self.compat_threshold > 0.0) || !(self.body_coefficient >= 0.0) {
            return Err(Error::Config("compat_threshold must be positive and body_coefficient non-negative".into()));
        }
        if self.horizon == Some(0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.physics.substeps == 0 || !(self.physics.control_dt > 0.0) {
            return Err(Error::Config("physics needs a positive control_dt and at least one substep".into()));
        }
        Ok(())
    }
}
