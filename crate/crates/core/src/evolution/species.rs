use serde::{Deserialize, Serialize};

use super::{EvaluatedIndividual, EvolutionConfig};
use crate::morphology::{body_distance, BodyGrid};
use crate::neat::{genotypic_distance, Genome};

/// Genome and body a species is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub genome: Genome,
    pub body: BodyGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub id: u64,
    pub representative: Representative,
    /// Indices into the population the species was built from.
    pub members: Vec<usize>,
    /// Best species fitness seen so far.
    pub best_fitness: f64,
    pub last_improved: usize,
    pub created: usize,
}

impl Species {
    pub fn stagnation(&self, generation: usize) -> usize {
        generation.saturating_sub(self.last_improved)
    }
}

/// Species in ascending id order plus the id counter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSet {
    pub species: Vec<Species>,
    pub next_id: u64,
}

impl SpeciesSet {
    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    /// Species index of every population member.
    pub fn assignment(&self, population_size: usize) -> Vec<Option<u64>> {
        let mut out = vec![None; population_size];
        for s in &self.species {
            for &m in &s.members {
                out[m] = Some(s.id);
            }
        }
        out
    }
}

/// `gDist(a, b) + v · body_distance(a, b)`.
pub fn hybrid_distance(a: &EvaluatedIndividual, b: &EvaluatedIndividual, cfg: &EvolutionConfig) -> f64 {
    pair_distance(&a.genome, &a.body, &b.genome, &b.body, cfg)
}

fn pair_distance(ga: &Genome, ba: &BodyGrid, gb: &Genome, bb: &BodyGrid, cfg: &EvolutionConfig) -> f64 {
    let g = genotypic_distance(ga, gb, cfg.distance);
    if cfg.body_coefficient == 0.0 {
        return g;
    }
    g + cfg.body_coefficient * body_distance(ba, bb).expect("bodies of one run share a grid size")
}

/// Hybrid-distance speciation with `cfg.compat_threshold`.
pub fn speciate(population: &[EvaluatedIndividual], previous: &SpeciesSet, cfg: &EvolutionConfig, generation: usize) -> SpeciesSet {
    speciate_with(population, previous, cfg.compat_threshold, generation, |ind, rep| {
        pair_distance(&ind.genome, &ind.body, &rep.genome, &rep.body, cfg)
    })
}

/// Speciation with an arbitrary distance between an individual and a
/// representative.
///
/// Each previous species, in ascending id, first claims the unassigned
/// individual closest to its old representative, if that one lies within
/// `threshold`; the claimed individual becomes the new representative.
/// Species that claim nobody die out. Everyone else joins the first species
/// (ascending id) whose new representative is within `threshold`, or founds
/// a new species.
pub fn speciate_with(
    population: &[EvaluatedIndividual],
    previous: &SpeciesSet,
    threshold: f64,
    generation: usize,
    distance: impl Fn(&EvaluatedIndividual, &Representative) -> f64,
) -> SpeciesSet {
    let mut assigned = vec![false; population.len()];
    let mut species = Vec::new();

    for old in &previous.species {
        let closest = population
            .iter()
            .enumerate()
            .filter(|(i, _)| !assigned[*i])
            .map(|(i, ind)| (i, distance(ind, &old.representative)))
            .filter(|(_, d)| *d < threshold)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((i, _)) = closest {
            assigned[i] = true;
            species.push(Species {
                id: old.id,
                representative: representative_of(&population[i]),
                members: vec![i],
                best_fitness: old.best_fitness,
                last_improved: old.last_improved,
                created: old.created,
            });
        }
    }

    let mut next_id = previous.next_id;
    for (i, ind) in population.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        match species.iter_mut().find(|s| distance(ind, &s.representative) < threshold) {
            Some(s) => s.members.push(i),
            None => {
                species.push(Species {
                    id: next_id,
                    representative: representative_of(ind),
                    members: vec![i],
                    best_fitness: f64::NEG_INFINITY,
                    last_improved: generation,
                    created: generation,
                });
                next_id += 1;
            }
        }
    }
    for s in &mut species {
        s.members.sort_unstable();
    }
    SpeciesSet { species, next_id }
}

fn representative_of(ind: &EvaluatedIndividual) -> Representative {
    Representative { genome: ind.genome.clone(), body: ind.body.clone() }
}
