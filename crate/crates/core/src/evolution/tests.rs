use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::morphology::VoxelType;
use crate::neat::{genotypic_distance, mutate, MutationParams};

fn individual(genome: Genome, body: BodyGrid, fitness: Option<f64>) -> EvaluatedIndividual {
    let status = match (body.validate(), fitness) {
        (Err(e), _) => Status::Invalid(e),
        (Ok(()), Some(_)) => Status::Evaluated,
        (Ok(()), None) => Status::Skipped,
    };
    EvaluatedIndividual { genome, phenotypes: None, body, fitness, status, controller_genome: None }
}

fn body(rows: &[&str]) -> BodyGrid {
    BodyGrid::from_rows(rows).unwrap()
}

fn walker_body() -> BodyGrid {
    body(&[".....", ".....", "#HHH#", "#...#", "....."])
}

/// Mutated variants of a minimal CPPN sharing one registry.
fn genome_pool(count: usize, seed: u64) -> Vec<Genome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reg = InnovationRegistry::new(7, 1);
    let base = new_minimal_genome(7, 1, &mut rng).unwrap();
    (0..count)
        .map(|_| {
            let mut g = base.clone();
            for _ in 0..rng.random_range(0..4) {
                g = mutate(&g, &mut reg, &MutationParams::default(), &mut rng);
            }
            g
        })
        .collect()
}

#[test]
fn hybrid_distance_basics() {
    let cfg = EvolutionConfig::default();
    let g = genome_pool(2, 1);
    let a = individual(g[0].clone(), walker_body(), Some(1.0));
    assert_eq!(hybrid_distance(&a, &a, &cfg), 0.0);

    let mut other_body = walker_body();
    other_body.set(0, 0, VoxelType::HorizontalActuator);
    let b = individual(g[1].clone(), other_body, Some(1.0));
    let gd = genotypic_distance(&a.genome, &b.genome, cfg.distance);
    assert!((hybrid_distance(&a, &b, &cfg) - (gd + 1.0)).abs() < 1e-12);
    assert_eq!(hybrid_distance(&a, &b, &cfg), hybrid_distance(&b, &a, &cfg));
    let v0 = EvolutionConfig { body_coefficient: 0.0, ..cfg };
    assert_eq!(hybrid_distance(&a, &b, &v0), gd);
}

#[test]
fn identical_population_is_one_species() {
    let g = genome_pool(1, 2).remove(0);
    let pop: Vec<_> = (0..16).map(|_| individual(g.clone(), walker_body(), Some(0.0))).collect();
    let s = speciate(&pop, &SpeciesSet::default(), &EvolutionConfig::default(), 0);
    assert_eq!(s.len(), 1);
    assert_eq!(s.species[0].members, (0..16).collect::<Vec<_>>());
}

#[test]
fn two_body_clusters_split_at_threshold() {
    let g = genome_pool(1, 3).remove(0);
    // five cells differ empty-vs-occupied: body distance 5.0 > 3.5
    let a = walker_body();
    let mut b = a.clone();
    for c in 0..5 {
        b.set(0, c, VoxelType::Soft);
    }
    let pop: Vec<_> = (0..12).map(|i| individual(g.clone(), if i % 2 == 0 { a.clone() } else { b.clone() }, Some(0.0))).collect();
    assert_eq!(hybrid_distance(&pop[0], &pop[1], &EvolutionConfig::default()), 5.0);
    let s = speciate(&pop, &SpeciesSet::default(), &EvolutionConfig::default(), 0);
    assert_eq!(s.len(), 2);
    assert_eq!(s.species[0].members, vec![0, 2, 4, 6, 8, 10]);
    // genotypes alone cannot tell them apart
    let v0 = EvolutionConfig { body_coefficient: 0.0, ..Default::default() };
    assert_eq!(speciate(&pop, &SpeciesSet::default(), &v0, 0).len(), 1);
}

#[test]
fn representatives_carry_over() {
    let genomes = genome_pool(20, 4);
    let pop: Vec<_> = genomes.iter().map(|g| individual(g.clone(), walker_body(), Some(0.0))).collect();
    let cfg = EvolutionConfig { compat_threshold: 0.6, ..Default::default() };
    let first = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    let second = speciate(&pop, &first, &cfg, 1);
    assert_eq!(first.assignment(20), second.assignment(20));
    assert_eq!(second.next_id, first.next_id);
    let again = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    assert_eq!(again, first);
    for s in &second.species {
        for &m in &s.members {
            assert!(hybrid_distance(&pop[m], &individual(s.representative.genome.clone(), s.representative.body.clone(), None), &cfg) < cfg.compat_threshold);
        }
    }
}

#[test]
fn single_species_equal_fitness_restores_population() {
    let genomes = genome_pool(24, 5);
    let pop: Vec<_> = genomes.iter().map(|g| individual(g.clone(), walker_body(), Some(1.0))).collect();
    let cfg = EvolutionConfig { compat_threshold: 100.0, population: 24, ..Default::default() };
    let mut species = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    let mut reg = InnovationRegistry::new(7, 1);
    let off = reproduce(&mut species, &pop, &cfg, 24, &mut reg, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(off.genomes.len(), 24);
    assert_eq!(off.quotas, vec![(0, 24)]);
    assert_eq!(off.elites.len(), 2);
}

#[test]
fn elites_copied_and_invalid_never_parent() {
    let genomes = genome_pool(24, 6);
    let invalid = body(&[".....", ".....", "#####", ".....", "....."]);
    let pop: Vec<_> = genomes
        .iter()
        .enumerate()
        .map(|(i, g)| if i % 3 == 0 { individual(g.clone(), invalid.clone(), None) } else { individual(g.clone(), walker_body(), Some(i as f64)) })
        .collect();
    let cfg = EvolutionConfig { compat_threshold: 100.0, population: 24, ..Default::default() };
    let mut species = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    let mut reg = InnovationRegistry::new(7, 1);
    let off = reproduce(&mut species, &pop, &cfg, 24, &mut reg, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(off.elites, vec![23, 22]);
    assert_eq!(off.genomes[0].connections, pop[23].genome.connections);
    assert_eq!(off.genomes[0].nodes, pop[23].genome.nodes);
    assert!(!off.parents.is_empty());
    assert!(off.parents.iter().all(|&p| pop[p].is_valid() && pop[p].fitness.is_some()));
    // top quarter of the 16 valid members
    assert!(off.parents.iter().all(|&p| p >= 19));
}

#[test]
fn small_species_padded_to_minimum() {
    // one genotype, so only bodies separate the species
    let genomes = vec![genome_pool(1, 7).remove(0); 24];
    let a = walker_body();
    let mut b = a.clone();
    for c in 0..5 {
        b.set(0, c, VoxelType::Soft);
    }
    // one strong species of 22 and a weak one of 2
    let pop: Vec<_> = genomes
        .iter()
        .enumerate()
        .map(|(i, g)| if i < 2 { individual(g.clone(), b.clone(), Some(0.0)) } else { individual(g.clone(), a.clone(), Some(10.0)) })
        .collect();
    let cfg = EvolutionConfig { population: 24, ..Default::default() };
    let mut species = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    assert_eq!(species.len(), 2);
    let mut reg = InnovationRegistry::new(7, 1);
    let off = reproduce(&mut species, &pop, &cfg, 24, &mut reg, &mut ChaCha8Rng::seed_from_u64(2));
    let weak = off.quotas.iter().find(|(id, _)| species.species.iter().any(|s| s.id == *id && s.members.contains(&0))).unwrap();
    assert_eq!(weak.1, 4);
    assert_eq!(off.quotas.iter().map(|q| q.1).sum::<usize>(), 24);
}

#[test]
fn stagnation_spares_best_species() {
    // one genotype, so only bodies separate the species
    let genomes = vec![genome_pool(1, 8).remove(0); 8];
    let a = walker_body();
    let mut b = a.clone();
    for c in 0..5 {
        b.set(0, c, VoxelType::Soft);
    }
    let pop: Vec<_> = genomes
        .iter()
        .enumerate()
        .map(|(i, g)| individual(g.clone(), if i < 4 { a.clone() } else { b.clone() }, Some(if i < 4 { 5.0 } else { 1.0 })))
        .collect();
    let cfg = EvolutionConfig { population: 8, ..Default::default() };
    let mut species = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    remove_stagnant(&mut species, &pop, &cfg, 0);
    // nothing improves for 21 generations
    let mut set = species.clone();
    let removed = remove_stagnant(&mut set, &pop, &cfg, 21);
    assert_eq!(removed.len(), 1);
    assert_eq!(set.len(), 1);
    assert!(set.species[0].members.contains(&0), "the fitter species survives");
    let mut set = species.clone();
    assert!(remove_stagnant(&mut set, &pop, &cfg, 20).is_empty());
}

#[test]
fn all_invalid_reseeds() {
    let genomes = genome_pool(8, 9);
    let invalid = BodyGrid::filled(5, VoxelType::Empty);
    let pop: Vec<_> = genomes.iter().map(|g| individual(g.clone(), invalid.clone(), None)).collect();
    let cfg = EvolutionConfig { population: 8, ..Default::default() };
    let mut species = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    let off = reproduce(&mut species, &pop, &cfg, 8, &mut InnovationRegistry::new(7, 1), &mut ChaCha8Rng::seed_from_u64(3));
    assert!(off.reseeded);
    assert_eq!(off.genomes.len(), 8);
    assert!(off.genomes.iter().all(|g| g.hidden_count() == 0 && g.connections.len() == 7));
}

fn small_cfg(seed: u64, generations: usize) -> EvolutionConfig {
    EvolutionConfig { population: 12, generations, horizon: Some(30), seed, ..Default::default() }
}

#[test]
fn zero_generations_archives_initial_population() {
    let cfg = small_cfg(1, 0);
    let run = evolve(&cfg, &cfg.task(TaskKind::Walker)).unwrap();
    assert_eq!(run.stats.len(), 1);
    assert_eq!(run.stats[0].generation, 0);
    assert!(run.complete);
}

#[test]
fn evolve_is_deterministic_and_monotone() {
    let cfg = small_cfg(7, 6);
    let task = cfg.task(TaskKind::Walker);
    let mut sizes = Vec::new();
    let a = evolve_observed(&cfg, &task, &mut |r| {
        sizes.push(r.population.len());
        if let Some(off) = r.offspring {
            assert_eq!(off.genomes.len(), 12);
        }
        Ok(())
    })
    .unwrap();
    let b = evolve(&cfg, &task).unwrap();
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.champions, b.champions);
    assert_eq!(sizes, vec![12; 6]);
    for w in a.stats.windows(2) {
        assert!(w[1].best >= w[0].best, "{} then {}", w[0].best, w[1].best);
    }
}

#[test]
fn budget_stops_the_run() {
    let cfg = EvolutionConfig { max_evaluations: Some(20), ..small_cfg(2, 50) };
    let run = evolve(&cfg, &cfg.task(TaskKind::Walker)).unwrap();
    assert!(!run.complete);
    assert!(run.stats.len() <= 3);
    assert!(run.stats.last().unwrap().evaluations_cumulative >= 20);
}

#[test]
fn champion_replays_to_its_fitness() {
    let cfg = small_cfg(3, 2);
    let task = cfg.task(TaskKind::Walker);
    let run = evolve(&cfg, &task).unwrap();
    let best = run.best.unwrap();
    let c = best.controller(&task).unwrap();
    let r = run_episode(&best.body, c.as_ref(), &task, false).unwrap();
    assert_eq!(r.fitness, best.fitness);
}

fn direct_genome(task: &TaskSpec, seed: u64) -> Genome {
    new_minimal_genome(DIRECT_COORDINATES + task.input_count(), 5 + task.output_count(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn direct_body_ignores_sensor_weights() {
    let task = crate::tasks::make_task(TaskKind::Walker);
    let mut g = direct_genome(&task, 1);
    let body = direct_body(&g, &task).unwrap();
    // in the minimal genome sensor inputs reach outputs only through their
    // own links, so changing those weights cannot matter while they read 0
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in g.connections.iter_mut().filter(|c| c.source.0 as usize >= DIRECT_COORDINATES) {
        c.weight = rng.random_range(-8.0..8.0);
    }
    assert_eq!(direct_body(&g, &task).unwrap(), body);
    // changing a coordinate link does matter eventually
    let mut h = g.clone();
    for c in h.connections.iter_mut().filter(|c| (c.source.0 as usize) < DIRECT_COORDINATES) {
        c.weight = -c.weight * 3.0;
    }
    assert_ne!(direct_body(&h, &task).unwrap(), body);
}

#[test]
fn direct_output_layout() {
    let task = crate::tasks::make_task(TaskKind::Walker);
    let mut g = direct_genome(&task, 3);
    let out0 = DIRECT_COORDINATES + task.input_count();
    for c in &mut g.connections {
        c.weight = 0.0;
    }
    for n in &mut g.nodes {
        // output k gets bias k/100, passed through tanh
        if n.id.0 as usize >= out0 {
            n.bias = (n.id.0 as usize - out0) as f64 / 100.0;
        }
    }
    let net = DirectNetwork::new(&g, &task).unwrap();
    let actions = net.act(&vec![0.3; task.input_count()]).unwrap();
    assert_eq!(actions.len(), 25);
    for (k, a) in actions.iter().enumerate() {
        assert!((a - ((5 + k) as f64 / 100.0).tanh()).abs() < 1e-15);
    }
    // logits 0..5 are increasing, so every cell is a vertical actuator
    assert_eq!(net.body(5).unwrap(), BodyGrid::filled(5, VoxelType::VerticalActuator));
    assert!(DirectNetwork::new(&g, &crate::tasks::make_task(TaskKind::Climber)).is_err());
}

#[test]
fn direct_baseline_runs_deterministically() {
    let cfg = small_cfg(4, 3);
    let task = cfg.task(TaskKind::Walker);
    let a = evolve_direct_baseline(&cfg, &task).unwrap();
    assert_eq!(a.stats, evolve_direct_baseline(&cfg, &task).unwrap().stats);
    assert_eq!(a.algorithm, Algorithm::Direct);
}

#[test]
fn nested_budget_and_cache() {
    let cfg = EvolutionConfig {
        nested: NestedConfig { population: 8, inner_population: 8, inner_generations: 2 },
        min_species_size: 4,
        ..small_cfg(5, 3)
    };
    let task = cfg.task(TaskKind::Walker);
    let mut per_gen = Vec::new();
    let mut last = 0;
    let a = run_algorithm(Algorithm::Nested, &cfg, &task, &mut |r| {
        per_gen.push(r.stats.evaluations_cumulative - last);
        last = r.stats.evaluations_cumulative;
        // a body seen twice in one generation costs one inner run
        let mut bodies: Vec<_> = r.population.iter().filter(|p| p.fitness.is_some()).map(|p| &p.body).collect();
        bodies.sort_by_key(|b| b.fingerprint());
        bodies.dedup();
        assert!((per_gen.last().copied().unwrap() as usize) <= bodies.len() * 8 * 2);
        Ok(())
    })
    .unwrap();
    assert!(per_gen.iter().all(|&e| e <= 8 * 8 * 2));
    let b = evolve_nested_baseline(&cfg, &task).unwrap();
    assert_eq!(a.stats, b.stats);
    let best = a.best.unwrap();
    assert!(best.controller_genome.is_some());
    let c = best.controller(&task).unwrap();
    assert_eq!(run_episode(&best.body, c.as_ref(), &task, false).unwrap().fitness, best.fitness);
}
