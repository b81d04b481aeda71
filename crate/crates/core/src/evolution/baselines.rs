use std::collections::HashMap;

use rayon::prelude::*;

use super::{run_loop, Algorithm, Batch, DistanceKind, EvaluatedIndividual, EvolutionConfig, LoopSpec, Observer, RunArtifacts};
use crate::hyperneat::{build_substrates, express_single, CPPN_INPUTS};
use crate::morphology::{decode_body_with, BodyGrid};
use crate::neat::Genome;
use crate::network::{CompiledCppn, Controller};
use crate::tasks::{run_episode, TaskSpec};
use crate::{Error, Result};

/// Coordinate inputs `(x, y)` that lead the direct network's inputs.
pub const DIRECT_COORDINATES: usize = 2;
const TYPE_LOGITS: usize = 5;

/// The direct-encoding network: inputs are `(x, y, sensors…)`, outputs are
/// five voxel-type logits followed by one action per cell.
#[derive(Debug, Clone)]
pub struct DirectNetwork {
    cppn: CompiledCppn,
    sensors: usize,
    actions: usize,
}

impl DirectNetwork {
    pub fn new(genome: &Genome, task: &TaskSpec) -> Result<Self> {
        let (inputs, outputs) = (DIRECT_COORDINATES + task.input_count(), TYPE_LOGITS + task.output_count());
        if genome.input_count != inputs || genome.output_count != outputs {
            return Err(Error::InvalidArgument(format!(
                "direct genome is {}x{}, task {} needs {inputs}x{outputs}",
                genome.input_count, genome.output_count, task.kind
            )));
        }
        Ok(Self { cppn: CompiledCppn::compile(genome)?, sensors: task.input_count(), actions: task.output_count() })
    }

    /// Body painted with the sensor inputs held at zero.
    pub fn body(&self, grid_size: usize) -> Result<BodyGrid> {
        let mut inputs = vec![0.0; DIRECT_COORDINATES + self.sensors];
        decode_body_with(grid_size, |x, y| {
            inputs[0] = x;
            inputs[1] = y;
            let out = self.cppn.activate(&inputs)?;
            Ok(out[..TYPE_LOGITS].to_vec())
        })
    }
}

impl Controller for DirectNetwork {
    fn input_count(&self) -> usize {
        self.sensors
    }

    fn output_count(&self) -> usize {
        self.actions
    }

    /// Actions with the coordinate inputs held at zero.
    fn act(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.sensors {
            return Err(Error::LengthMismatch { expected: self.sensors, got: observation.len() });
        }
        let mut inputs = Vec::with_capacity(DIRECT_COORDINATES + self.sensors);
        inputs.extend([0.0; DIRECT_COORDINATES]);
        inputs.extend_from_slice(observation);
        let out = self.cppn.activate(&inputs)?;
        Ok(out[TYPE_LOGITS..].to_vec())
    }
}

/// Body decoded from a direct-encoding genome.
pub fn direct_body(genome: &Genome, task: &TaskSpec) -> Result<BodyGrid> {
    DirectNetwork::new(genome, task)?.body(task.grid_size)
}

fn evaluate_direct(genome: &Genome, task: &TaskSpec) -> Result<EvaluatedIndividual> {
    let net = DirectNetwork::new(genome, task)?;
    let ind = EvaluatedIndividual::new(genome, net.body(task.grid_size)?, None);
    if !ind.is_valid() {
        return Ok(ind);
    }
    let fitness = run_episode(&ind.body, &net, task, false)?.fitness;
    Ok(ind.scored(fitness))
}

/// One NEAT population over a single network that both paints the body and
/// drives it, speciated on the hybrid distance.
pub fn evolve_direct_baseline(cfg: &EvolutionConfig, task: &TaskSpec) -> Result<RunArtifacts> {
    evolve_direct_observed(cfg, task, &mut |_| Ok(()))
}

pub(crate) fn evolve_direct_observed(cfg: &EvolutionConfig, task: &TaskSpec, observer: &mut Observer) -> Result<RunArtifacts> {
    super::check_task(cfg, task)?;
    let mut evaluate = |genomes: &[Genome], _spent: u64| -> Result<Batch> {
        let individuals: Vec<EvaluatedIndividual> =
            genomes.par_iter().map(|g| evaluate_direct(g, task)).collect::<Result<_>>()?;
        let evaluations = individuals.iter().filter(|i| i.fitness.is_some()).count() as u64;
        Ok(Batch { individuals, evaluations, exhausted: false })
    };
    run_loop(
        LoopSpec {
            algorithm: Algorithm::Direct,
            task: task.kind,
            cfg,
            population: cfg.population,
            generations: cfg.generations,
            shape: (DIRECT_COORDINATES + task.input_count(), TYPE_LOGITS + task.output_count()),
            distance: DistanceKind::Hybrid,
            seed: cfg.seed,
        },
        &mut evaluate,
        observer,
    )
}

/// SplitMix64 finaliser, used to derive per-body seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
struct InnerResult {
    fitness: f64,
    controller: Genome,
}

/// Evolves controllers for one fixed body; `None` if the budget allowed no
/// episode at all.
fn inner_run(body: &BodyGrid, cfg: &EvolutionConfig, task: &TaskSpec, budget: Option<u64>) -> Result<(Option<InnerResult>, u64, bool)> {
    let substrates = build_substrates(task.input_count(), task.grid_size)?;
    let inner_cfg = EvolutionConfig {
        population: cfg.nested.inner_population,
        generations: cfg.nested.inner_generations,
        max_evaluations: budget,
        ..cfg.clone()
    };
    let mut evaluate = |genomes: &[Genome], spent: u64| -> Result<Batch> {
        let allowed = budget.map_or(genomes.len(), |b| (b.saturating_sub(spent) as usize).min(genomes.len()));
        let individuals: Vec<EvaluatedIndividual> = genomes
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let ind = EvaluatedIndividual::new(g, body.clone(), None);
                if i >= allowed {
                    return Ok(ind);
                }
                let controller = express_single(g, &substrates.1)?;
                Ok(ind.scored(run_episode(body, &controller, task, false)?.fitness))
            })
            .collect::<Result<_>>()?;
        Ok(Batch { individuals, evaluations: allowed as u64, exhausted: allowed < genomes.len() })
    };
    let run = run_loop(
        LoopSpec {
            algorithm: Algorithm::Nested,
            task: task.kind,
            cfg: &inner_cfg,
            population: inner_cfg.population,
            generations: inner_cfg.generations,
            shape: (CPPN_INPUTS, 1),
            distance: DistanceKind::Genotypic,
            seed: mix(cfg.seed ^ body.fingerprint()),
        },
        &mut evaluate,
        &mut |_| Ok(()),
    )?;
    let spent = run.stats.last().map_or(0, |s| s.evaluations_cumulative);
    let result = run.best.map(|c| InnerResult { fitness: c.fitness, controller: c.genome });
    Ok((result, spent, !run.complete))
}

/// Outer NEAT population of morphology CPPNs; each new valid body gets its
/// own inner NEAT run over controller CPPNs, and scores its best controller.
/// Bodies are cached by fingerprint for the whole run.
pub fn evolve_nested_baseline(cfg: &EvolutionConfig, task: &TaskSpec) -> Result<RunArtifacts> {
    evolve_nested_observed(cfg, task, &mut |_| Ok(()))
}

pub(crate) fn evolve_nested_observed(cfg: &EvolutionConfig, task: &TaskSpec, observer: &mut Observer) -> Result<RunArtifacts> {
    super::check_task(cfg, task)?;
    let substrates = build_substrates(task.input_count(), task.grid_size)?;
    let mut cache: HashMap<BodyGrid, Option<InnerResult>> = HashMap::new();
    let mut evaluate = |genomes: &[Genome], spent: u64| -> Result<Batch> {
        let mut individuals = Vec::with_capacity(genomes.len());
        let mut evaluations = 0u64;
        let mut exhausted = false;
        for g in genomes {
            let morphology = express_single(g, &substrates.0)?;
            let body = crate::morphology::decode_body(&morphology, task.grid_size)?;
            let mut ind = EvaluatedIndividual::new(g, body, None);
            if !ind.is_valid() {
                individuals.push(ind);
                continue;
            }
            let result = match cache.get(&ind.body) {
                Some(r) => r.clone(),
                None if exhausted => None,
                None => {
                    let remaining = cfg.max_evaluations.map(|b| b.saturating_sub(spent + evaluations));
                    let (r, used, ran_out) = inner_run(&ind.body, cfg, task, remaining)?;
                    evaluations += used;
                    exhausted |= ran_out || remaining.is_some_and(|left| used >= left);
                    // a body whose inner run was cut short is not cached as final
                    if !ran_out {
                        cache.insert(ind.body.clone(), r.clone());
                    }
                    r
                }
            };
            if let Some(r) = result {
                ind.controller_genome = Some(r.controller);
                ind = ind.scored(r.fitness);
            }
            individuals.push(ind);
        }
        Ok(Batch { individuals, evaluations, exhausted })
    };
    run_loop(
        LoopSpec {
            algorithm: Algorithm::Nested,
            task: task.kind,
            cfg,
            population: cfg.nested.population,
            generations: cfg.generations,
            shape: (CPPN_INPUTS, 1),
            distance: DistanceKind::Genotypic,
            seed: cfg.seed,
        },
        &mut evaluate,
        observer,
    )
}
