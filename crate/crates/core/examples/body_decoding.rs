//! Decode random genomes into bodies and show which pass the minimum criterion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voxel_coevo::hyperneat::{build_substrates, express_single, CPPN_INPUTS};
use voxel_coevo::morphology::decode_body;
use voxel_coevo::neat::{mutate, new_minimal_genome, InnovationRegistry, MutationParams};

fn main() -> voxel_coevo::Result<()> {
    let (morphology, _) = build_substrates(52, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut registry = InnovationRegistry::new(CPPN_INPUTS, 1);
    let mut valid = 0;
    for i in 0..200 {
        let mut g = new_minimal_genome(CPPN_INPUTS, 1, &mut rng)?;
        for _ in 0..i % 12 {
            g = mutate(&g, &mut registry, &MutationParams::default(), &mut rng);
        }
        let body = decode_body(&express_single(&g, &morphology)?, 5)?;
        match body.validate() {
            Ok(()) => valid += 1,
            Err(_) if i >= 6 => {}
            Err(e) => println!("#{i}: rejected ({e})\n{}\n", body.to_ascii()),
        }
        if i < 6 && body.is_valid() {
            println!("#{i}: {} voxels, {} actuators\n{}\n", body.occupied_count(), body.actuator_count(), body.to_ascii());
        }
    }
    println!("{valid} of 200 random bodies are connected and actuated");
    Ok(())
}
