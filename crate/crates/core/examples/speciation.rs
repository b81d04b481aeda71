//! How the body term of the hybrid distance changes the species partition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voxel_coevo::evolution::{speciate, EvaluatedIndividual, EvolutionConfig, SpeciesSet, Status};
use voxel_coevo::hyperneat::{build_substrates, express_single, CPPN_INPUTS};
use voxel_coevo::morphology::{body_distance, decode_body};
use voxel_coevo::neat::{genotypic_distance, mutate, new_minimal_genome, InnovationRegistry, MutationParams};

fn main() -> voxel_coevo::Result<()> {
    let (morphology, _) = build_substrates(52, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut registry = InnovationRegistry::new(CPPN_INPUTS, 1);
    let base = new_minimal_genome(CPPN_INPUTS, 1, &mut rng)?;
    let mut population = Vec::new();
    for i in 0..64 {
        let mut g = base.clone();
        for _ in 0..i % 5 {
            g = mutate(&g, &mut registry, &MutationParams::default(), &mut rng);
        }
        let body = decode_body(&express_single(&g, &morphology)?, 5)?;
        let status = body.validate().map_or_else(Status::Invalid, |_| Status::Skipped);
        population.push(EvaluatedIndividual { genome: g, phenotypes: None, body, fitness: None, status, controller_genome: None });
    }

    let (a, b) = (&population[1], &population[7]);
    let cfg = EvolutionConfig::default();
    println!(
        "pair 1/7: genotypic {:.3}, body {:.1}",
        genotypic_distance(&a.genome, &b.genome, cfg.distance),
        body_distance(&a.body, &b.body)?
    );
    for v in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let cfg = EvolutionConfig { body_coefficient: v, ..Default::default() };
        let species = speciate(&population, &SpeciesSet::default(), &cfg, 0);
        let sizes: Vec<usize> = species.species.iter().map(|s| s.members.len()).collect();
        println!("v = {v:<4} -> {:>2} species {sizes:?}", species.len());
    }
    Ok(())
}
