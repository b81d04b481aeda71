use rand::Rng;

use super::species::SpeciesSet;
use super::{EvaluatedIndividual, EvolutionConfig};
use crate::neat::{crossover, mutate, new_minimal_genome, order_parents, Genome, InnovationRegistry};

/// Best valid member fitness of a species, `-inf` if it has none.
pub(crate) fn species_fitness(members: &[usize], population: &[EvaluatedIndividual]) -> f64 {
    members.iter().filter_map(|&m| population[m].fitness).fold(f64::NEG_INFINITY, f64::max)
}

/// Records improvements and drops species stagnant for more than
/// `max_stagnation` generations. The `species_elitism` best species are
/// always kept. Returns the ids removed.
pub fn remove_stagnant(species: &mut SpeciesSet, population: &[EvaluatedIndividual], cfg: &EvolutionConfig, generation: usize) -> Vec<u64> {
    for s in &mut species.species {
        let f = species_fitness(&s.members, population);
        if f > s.best_fitness {
            s.best_fitness = f;
            s.last_improved = generation;
        }
    }
    let mut ranked: Vec<(usize, f64)> =
        species.species.iter().enumerate().map(|(i, s)| (i, species_fitness(&s.members, population))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let protected: Vec<usize> = ranked.iter().take(cfg.species_elitism).map(|r| r.0).collect();

    let mut removed = Vec::new();
    let mut idx = 0;
    species.species.retain(|s| {
        let keep = protected.contains(&idx) || s.stagnation(generation) <= cfg.max_stagnation;
        if !keep {
            removed.push(s.id);
        }
        idx += 1;
        keep
    });
    removed
}

/// Splits `total` slots between species in proportion to `weights`, giving
/// every species at least `floor`. Fractional parts go to the largest
/// remainders, ties to the lower index. Requires `weights.len() · floor ≤ total`.
pub fn allocate_quotas(weights: &[f64], total: usize, floor: usize) -> Vec<usize> {
    let k = weights.len();
    assert!(k * floor <= total, "{k} species cannot each get {floor} of {total} slots");
    if k == 0 {
        return Vec::new();
    }
    let mut fixed = vec![false; k];
    loop {
        let free: Vec<usize> = (0..k).filter(|&i| !fixed[i]).collect();
        let budget = total - floor * (k - free.len());
        let ideal = ideal_shares(weights, &free, budget);
        let mut changed = false;
        for (&i, &share) in free.iter().zip(&ideal) {
            if share < floor as f64 {
                fixed[i] = true;
                changed = true;
            }
        }
        if changed && fixed.iter().any(|f| !f) {
            continue;
        }
        let mut quotas = vec![floor; k];
        if fixed.iter().all(|&f| f) {
            // everyone sits on the floor; hand out what is left evenly
            let free: Vec<usize> = (0..k).collect();
            let ideal = ideal_shares(&vec![1.0; k], &free, total - floor * k);
            distribute(&mut quotas, &free, &ideal, total - floor * k, true);
            return quotas;
        }
        distribute(&mut quotas, &free, &ideal, budget, false);
        return quotas;
    }
}

fn ideal_shares(weights: &[f64], free: &[usize], budget: usize) -> Vec<f64> {
    let sum: f64 = free.iter().map(|&i| weights[i].max(0.0)).sum();
    free.iter()
        .map(|&i| if sum > 0.0 { budget as f64 * weights[i].max(0.0) / sum } else { budget as f64 / free.len() as f64 })
        .collect()
}

fn distribute(quotas: &mut [usize], free: &[usize], ideal: &[f64], budget: usize, add: bool) {
    let mut given = 0;
    for (&i, &share) in free.iter().zip(ideal) {
        let base = share.floor() as usize;
        quotas[i] = if add { quotas[i] + base } else { base };
        given += base;
    }
    let mut order: Vec<usize> = (0..free.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())).then(a.cmp(&b)));
    for &j in order.iter().take(budget - given) {
        quotas[free[j]] += 1;
    }
}

/// Outcome of one reproduction step.
#[derive(Debug, Clone)]
pub struct Offspring {
    pub genomes: Vec<Genome>,
    /// Species id and offspring count, in species order.
    pub quotas: Vec<(u64, usize)>,
    /// Population indices copied unchanged.
    pub elites: Vec<usize>,
    /// Population indices that parented at least one child.
    pub parents: Vec<usize>,
    pub reseeded: bool,
}

/// Builds the next generation from the current species.
///
/// Species without a valid member are dropped. If more species remain than
/// `population / min_species_size`, only the fittest of them reproduce.
/// Quotas follow each species' summed `(f − f_min)` divided by its size,
/// with a floor of `min_species_size`. Within a species the `elitism` best
/// valid members are copied, the best `survival_threshold` share of valid
/// members (at least two when available) form the parent pool, and the
/// remaining slots are filled with crossover children or mutated clones.
pub fn reproduce<R: Rng + ?Sized>(
    species: &mut SpeciesSet,
    population: &[EvaluatedIndividual],
    cfg: &EvolutionConfig,
    size: usize,
    registry: &mut InnovationRegistry,
    rng: &mut R,
) -> Offspring {
    species.species.retain(|s| s.members.iter().any(|&m| population[m].fitness.is_some()));
    if species.is_empty() {
        log::warn!("no valid individual left; reseeding the population");
        let (inputs, outputs) = population
            .first()
            .map(|p| (p.genome.input_count, p.genome.output_count))
            .expect("reproduce needs a non-empty population");
        let genomes = (0..size).map(|_| new_minimal_genome(inputs, outputs, rng).expect("shape is valid")).collect();
        return Offspring { genomes, quotas: Vec::new(), elites: Vec::new(), parents: Vec::new(), reseeded: true };
    }

    let max_species = (size / cfg.min_species_size).max(1);
    if species.len() > max_species {
        let mut ranked: Vec<(usize, f64)> =
            species.species.iter().enumerate().map(|(i, s)| (i, species_fitness(&s.members, population))).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let keep: Vec<usize> = ranked.iter().take(max_species).map(|r| r.0).collect();
        let mut idx = 0;
        species.species.retain(|_| {
            idx += 1;
            keep.contains(&(idx - 1))
        });
    }

    let valid_fitness = population.iter().filter_map(|p| p.fitness);
    let f_min = valid_fitness.fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = species
        .species
        .iter()
        .map(|s| {
            let shared: f64 = s.members.iter().filter_map(|&m| population[m].fitness).map(|f| f - f_min).sum();
            shared / s.members.len() as f64
        })
        .collect();
    let floor = cfg.min_species_size.min(size / species.len());
    let counts = allocate_quotas(&weights, size, floor);

    let mut out = Offspring {
        genomes: Vec::with_capacity(size),
        quotas: Vec::new(),
        elites: Vec::new(),
        parents: Vec::new(),
        reseeded: false,
    };
    for (s, &quota) in species.species.iter().zip(&counts) {
        out.quotas.push((s.id, quota));
        let mut ranked: Vec<usize> = s.members.iter().copied().filter(|&m| population[m].fitness.is_some()).collect();
        ranked.sort_by(|&a, &b| population[b].fitness.unwrap().total_cmp(&population[a].fitness.unwrap()).then(a.cmp(&b)));

        let elites = cfg.elitism.min(quota).min(ranked.len());
        for &e in &ranked[..elites] {
            out.genomes.push(with_fitness(&population[e]));
            out.elites.push(e);
        }
        let remaining = quota - elites;
        if remaining == 0 {
            continue;
        }
        let pool_size = ((cfg.survival_threshold * ranked.len() as f64).ceil() as usize).max(2).min(ranked.len());
        let pool = &ranked[..pool_size];
        let mut used = vec![false; pool_size];
        for _ in 0..remaining {
            let a = rng.random_range(0..pool_size);
            let child = if rng.random::<f64>() < cfg.crossover_fraction {
                let b = rng.random_range(0..pool_size);
                used[b] = true;
                let (ga, gb) = (with_fitness(&population[pool[a]]), with_fitness(&population[pool[b]]));
                let (fitter, other) = order_parents(&ga, &gb);
                crossover(fitter, other, rng)
            } else {
                population[pool[a]].genome.clone()
            };
            used[a] = true;
            out.genomes.push(mutate(&child, registry, &cfg.mutation, rng));
        }
        out.parents.extend(pool.iter().zip(&used).filter(|(_, u)| **u).map(|(p, _)| *p));
    }
    debug_assert_eq!(out.genomes.len(), size);
    out
}

fn with_fitness(ind: &EvaluatedIndividual) -> Genome {
    let mut g = ind.genome.clone();
    g.fitness = ind.fitness;
    g
}
