//! Grow a random CPPN and express it onto both substrates.
//!
//!     cargo run --example cppn_substrate -- 7

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voxel_coevo::hyperneat::{build_substrates, express, CPPN_INPUTS};
use voxel_coevo::neat::{mutate, new_minimal_genome, InnovationRegistry, MutationParams};
use voxel_coevo::tasks::{make_task, TaskKind};

fn main() -> voxel_coevo::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut registry = InnovationRegistry::new(CPPN_INPUTS, 1);
    let mut genome = new_minimal_genome(CPPN_INPUTS, 1, &mut rng)?;
    for _ in 0..15 {
        genome = mutate(&genome, &mut registry, &MutationParams::default(), &mut rng);
    }
    println!(
        "genome: {} nodes ({} hidden), {} connections",
        genome.nodes.len(),
        genome.hidden_count(),
        genome.connections.len()
    );

    let task = make_task(TaskKind::Walker);
    let substrates = build_substrates(task.input_count(), task.grid_size)?;
    let nets = express(&genome, &substrates)?;
    for (name, net) in [("morphology", &nets.morphology), ("controller", &nets.controller)] {
        println!("{name:<11} layers {:?}, {} weights, max |w| {:.3}", net.layers(), net.connection_count(), net.max_abs_weight());
    }
    println!("morphology weights, hidden <- input:");
    for row in nets.morphology.weights()[0].chunks(2) {
        println!("  {row:+.3?}");
    }
    Ok(())
}
