//! The generational loop: evaluate, speciate on hybrid distance, select and
//! reproduce. Also hosts the direct-encoding and nested-loop baselines.

mod baselines;
mod config;
mod reproduction;
mod species;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hyperneat::{build_substrates, express, express_single, GenomePhenotypes, Substrate, CPPN_INPUTS};
use crate::morphology::{decode_body, BodyGrid, InvalidBody};
use crate::neat::{genotypic_distance, new_minimal_genome, Genome, InnovationRegistry};
use crate::network::Controller;
use crate::tasks::{make_task_with, run_episode, TaskKind, TaskSpec};
use crate::{Error, Result};

pub use baselines::{direct_body, evolve_direct_baseline, evolve_nested_baseline, DirectNetwork, DIRECT_COORDINATES};
pub use config::{EvolutionConfig, NestedConfig};
pub use reproduction::{allocate_quotas, remove_stagnant, reproduce, Offspring};
pub use species::{hybrid_distance, speciate, speciate_with, Representative, Species, SpeciesSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// One CPPN per individual painting both body and controller.
    Hyperneat,
    /// One directly evolved network that outputs body types and actions.
    Direct,
    /// Outer morphology population, inner controller population per body.
    Nested,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hyperneat => "hyperneat",
            Algorithm::Direct => "direct",
            Algorithm::Nested => "nested",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Algorithm::Hyperneat, Algorithm::Direct, Algorithm::Nested]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// What happened to an individual in its generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Evaluated,
    Invalid(InvalidBody),
    /// Not run because the evaluation budget ran out.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct EvaluatedIndividual {
    pub genome: Genome,
    /// Substrate networks, for encodings that have them.
    pub phenotypes: Option<GenomePhenotypes>,
    pub body: BodyGrid,
    /// Present exactly when the body was valid and an episode ran.
    pub fitness: Option<f64>,
    pub status: Status,
    /// Separately evolved controller, for the nested baseline.
    pub controller_genome: Option<Genome>,
}

impl EvaluatedIndividual {
    pub fn is_valid(&self) -> bool {
        !matches!(self.status, Status::Invalid(_))
    }

    fn new(genome: &Genome, body: BodyGrid, phenotypes: Option<GenomePhenotypes>) -> Self {
        let status = match body.validate() {
            Ok(()) => Status::Skipped,
            Err(e) => Status::Invalid(e),
        };
        Self { genome: genome.clone(), phenotypes, body, fitness: None, status, controller_genome: None }
    }

    fn scored(mut self, fitness: f64) -> Self {
        self.fitness = Some(fitness);
        self.status = Status::Evaluated;
        self
    }
}

/// One row of the statistics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub median: f64,
    pub species_count: usize,
    pub valid_fraction: f64,
    pub evaluations_cumulative: u64,
}

impl GenerationStats {
    pub const COLUMNS: [&'static str; 7] =
        ["generation", "best", "mean", "median", "species_count", "valid_fraction", "evaluations_cumulative"];
}

/// Best individual of a generation, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Champion {
    pub algorithm: Algorithm,
    pub task: TaskKind,
    pub generation: usize,
    pub fitness: f64,
    pub body: BodyGrid,
    pub genome: Genome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller_genome: Option<Genome>,
}

impl Champion {
    /// Rebuilds the controller for `task`.
    pub fn controller(&self, task: &TaskSpec) -> Result<Box<dyn Controller>> {
        if self.body.size() != task.grid_size {
            return Err(Error::DimensionMismatch(task.grid_size, self.body.size()));
        }
        match self.algorithm {
            Algorithm::Hyperneat => {
                let subs = build_substrates(task.input_count(), task.grid_size)?;
                Ok(Box::new(express_single(&self.genome, &subs.1)?))
            }
            Algorithm::Nested => {
                let genome = self
                    .controller_genome
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("nested champion has no controller genome".into()))?;
                let subs = build_substrates(task.input_count(), task.grid_size)?;
                Ok(Box::new(express_single(genome, &subs.1)?))
            }
            Algorithm::Direct => Ok(Box::new(DirectNetwork::new(&self.genome, task)?)),
        }
    }
}

/// A generation as seen by an observer.
pub struct GenerationReport<'a> {
    pub stats: &'a GenerationStats,
    pub champion: Option<&'a Champion>,
    pub population: &'a [EvaluatedIndividual],
    /// The partition of `population`, before stagnation removal.
    pub species: &'a SpeciesSet,
    /// Absent after the final generation.
    pub offspring: Option<&'a Offspring>,
    pub removed_species: &'a [u64],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub algorithm: Algorithm,
    pub task: TaskKind,
    pub seed: u64,
    pub config: EvolutionConfig,
    pub stats: Vec<GenerationStats>,
    /// Champion of every generation that had a valid individual.
    pub champions: Vec<Champion>,
    pub best: Option<Champion>,
    /// False when the run stopped because the evaluation budget ran out.
    pub complete: bool,
}

pub type Observer<'a> = dyn FnMut(&GenerationReport) -> Result<()> + 'a;

impl EvolutionConfig {
    /// Task instance with this configuration's grid size, horizon and physics.
    pub fn task(&self, kind: TaskKind) -> TaskSpec {
        let mut t = make_task_with(kind, self.robot_size);
        if let Some(h) = self.horizon {
            t.horizon = h;
        }
        t.physics = self.physics.clone();
        t
    }
}

/// Output of evaluating one generation.
pub(crate) struct Batch {
    pub individuals: Vec<EvaluatedIndividual>,
    pub evaluations: u64,
    /// The budget ran out while evaluating this batch.
    pub exhausted: bool,
}

#[derive(Clone, Copy)]
pub(crate) enum DistanceKind {
    Hybrid,
    Genotypic,
}

pub(crate) struct LoopSpec<'a> {
    pub algorithm: Algorithm,
    pub task: TaskKind,
    pub cfg: &'a EvolutionConfig,
    pub population: usize,
    pub generations: usize,
    pub shape: (usize, usize),
    pub distance: DistanceKind,
    pub seed: u64,
}

/// Reproduction stream of `generation`; stream 0 seeds the initial population.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The shared NEAT generational loop. `evaluate` receives the genomes of a
/// generation and the evaluations spent so far.
pub(crate) fn run_loop(
    spec: LoopSpec,
    evaluate: &mut dyn FnMut(&[Genome], u64) -> Result<Batch>,
    observer: &mut Observer,
) -> Result<RunArtifacts> {
    let cfg = spec.cfg;
    cfg.validate()?;
    let (inputs, outputs) = spec.shape;
    let mut rng = stream_rng(spec.seed, 0);
    let mut genomes: Vec<Genome> =
        (0..spec.population).map(|_| new_minimal_genome(inputs, outputs, &mut rng)).collect::<Result<_>>()?;
    let mut registry = InnovationRegistry::new(inputs, outputs);
    let mut species = SpeciesSet::default();
    let mut artifacts = RunArtifacts {
        algorithm: spec.algorithm,
        task: spec.task,
        seed: spec.seed,
        config: cfg.clone(),
        stats: Vec::new(),
        champions: Vec::new(),
        best: None,
        complete: true,
    };
    let mut evaluations = 0u64;
    let generations = spec.generations.max(1);

    for generation in 0..generations {
        debug_assert_eq!(genomes.len(), spec.population);
        let batch = evaluate(&genomes, evaluations)?;
        evaluations += batch.evaluations;
        let population = batch.individuals;

        species = match spec.distance {
            DistanceKind::Hybrid => speciate(&population, &species, cfg, generation),
            DistanceKind::Genotypic => speciate_with(&population, &species, cfg.compat_threshold, generation, |ind, rep| {
                genotypic_distance(&ind.genome, &rep.genome, cfg.distance)
            }),
        };
        let stats = generation_stats(generation, &population, species.len(), evaluations);
        let champion = champion_of(&population, spec.algorithm, spec.task, generation);
        if let Some(c) = &champion {
            if artifacts.best.as_ref().is_none_or(|b| c.fitness > b.fitness) {
                artifacts.best = Some(c.clone());
            }
            artifacts.champions.push(c.clone());
        }
        let budget_spent = batch.exhausted || cfg.max_evaluations.is_some_and(|b| evaluations >= b);
        let last = generation + 1 == generations || budget_spent;

        let partition = species.clone();
        let (removed, offspring) = if last {
            (Vec::new(), None)
        } else {
            let removed = remove_stagnant(&mut species, &population, cfg, generation);
            let mut rng = stream_rng(spec.seed, generation as u64 + 1);
            let off = reproduce(&mut species, &population, cfg, spec.population, &mut registry, &mut rng);
            (removed, Some(off))
        };
        observer(&GenerationReport {
            stats: &stats,
            champion: champion.as_ref(),
            population: &population,
            species: &partition,
            offspring: offspring.as_ref(),
            removed_species: &removed,
        })?;
        artifacts.stats.push(stats);
        if budget_spent && generation + 1 < generations {
            artifacts.complete = false;
        }
        match offspring {
            Some(off) => {
                if off.reseeded {
                    species = SpeciesSet { species: Vec::new(), next_id: species.next_id };
                }
                genomes = off.genomes;
            }
            None => break,
        }
    }
    Ok(artifacts)
}

fn generation_stats(generation: usize, population: &[EvaluatedIndividual], species_count: usize, evaluations: u64) -> GenerationStats {
    let mut fits: Vec<f64> = population.iter().filter_map(|p| p.fitness).collect();
    fits.sort_by(f64::total_cmp);
    let (best, mean, median) = if fits.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let n = fits.len();
        let median = if n % 2 == 1 { fits[n / 2] } else { (fits[n / 2 - 1] + fits[n / 2]) / 2.0 };
        (fits[n - 1], fits.iter().sum::<f64>() / n as f64, median)
    };
    let valid = population.iter().filter(|p| p.is_valid()).count();
    GenerationStats {
        generation,
        best,
        mean,
        median,
        species_count,
        valid_fraction: valid as f64 / population.len().max(1) as f64,
        evaluations_cumulative: evaluations,
    }
}

/// Highest fitness, lowest index on ties.
fn champion_of(population: &[EvaluatedIndividual], algorithm: Algorithm, task: TaskKind, generation: usize) -> Option<Champion> {
    let mut best: Option<&EvaluatedIndividual> = None;
    for p in population {
        if let Some(f) = p.fitness {
            if best.is_none_or(|b| f > b.fitness.unwrap()) {
                best = Some(p);
            }
        }
    }
    best.map(|p| Champion {
        algorithm,
        task,
        generation,
        fitness: p.fitness.unwrap(),
        body: p.body.clone(),
        genome: p.genome.clone(),
        controller_genome: p.controller_genome.clone(),
    })
}

/// Expresses, decodes and (for valid bodies) runs one CPPN genome.
pub fn evaluate_genome(genome: &Genome, task: &TaskSpec, substrates: &(Substrate, Substrate)) -> Result<EvaluatedIndividual> {
    let phenotypes = express(genome, substrates)?;
    let body = decode_body(&phenotypes.morphology, task.grid_size)?;
    let ind = EvaluatedIndividual::new(genome, body, None);
    if !ind.is_valid() {
        return Ok(EvaluatedIndividual { phenotypes: Some(phenotypes), ..ind });
    }
    let result = run_episode(&ind.body, &phenotypes.controller, task, false)?;
    Ok(EvaluatedIndividual { phenotypes: Some(phenotypes), ..ind }.scored(result.fitness))
}

fn check_task(cfg: &EvolutionConfig, task: &TaskSpec) -> Result<()> {
    if task.grid_size != cfg.robot_size {
        return Err(Error::Config(format!("task grid {} differs from robot_size {}", task.grid_size, cfg.robot_size)));
    }
    Ok(())
}

/// Single-genome co-evolution of body and controller.
pub fn evolve(cfg: &EvolutionConfig, task: &TaskSpec) -> Result<RunArtifacts> {
    evolve_observed(cfg, task, &mut |_| Ok(()))
}

pub fn evolve_observed(cfg: &EvolutionConfig, task: &TaskSpec, observer: &mut Observer) -> Result<RunArtifacts> {
    check_task(cfg, task)?;
    let substrates = build_substrates(task.input_count(), task.grid_size)?;
    let mut evaluate = |genomes: &[Genome], _spent: u64| -> Result<Batch> {
        let individuals: Vec<EvaluatedIndividual> =
            genomes.par_iter().map(|g| evaluate_genome(g, task, &substrates)).collect::<Result<_>>()?;
        let evaluations = individuals.iter().filter(|i| i.fitness.is_some()).count() as u64;
        Ok(Batch { individuals, evaluations, exhausted: false })
    };
    run_loop(
        LoopSpec {
            algorithm: Algorithm::Hyperneat,
            task: task.kind,
            cfg,
            population: cfg.population,
            generations: cfg.generations,
            shape: (CPPN_INPUTS, 1),
            distance: DistanceKind::Hybrid,
            seed: cfg.seed,
        },
        &mut evaluate,
        observer,
    )
}

/// Dispatches to the selected algorithm.
pub fn run_algorithm(algorithm: Algorithm, cfg: &EvolutionConfig, task: &TaskSpec, observer: &mut Observer) -> Result<RunArtifacts> {
    match algorithm {
        Algorithm::Hyperneat => evolve_observed(cfg, task, observer),
        Algorithm::Direct => baselines::evolve_direct_observed(cfg, task, observer),
        Algorithm::Nested => baselines::evolve_nested_observed(cfg, task, observer),
    }
}

#[cfg(test)]
mod tests;
