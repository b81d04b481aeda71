//! Evolve walkers with single-genome HyperNEAT and print per-generation stats.
//!
//!     cargo run --release --example evolve_walker -- 20

use voxel_coevo::evolution::{evolve_observed, EvolutionConfig};
use voxel_coevo::tasks::TaskKind;

fn main() -> voxel_coevo::Result<()> {
    let generations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(15);
    let cfg = EvolutionConfig { population: 24, generations, horizon: Some(200), seed: 1, ..Default::default() };
    let task = cfg.task(TaskKind::Walker);
    println!("gen   best     mean    species  valid");
    let run = evolve_observed(&cfg, &task, &mut |r| {
        let s = r.stats;
        println!("{:>3} {:>7.3} {:>8.3} {:>6} {:>8.2}", s.generation, s.best, s.mean, s.species_count, s.valid_fraction);
        Ok(())
    })?;
    if let Some(best) = run.best {
        println!("\nbest fitness {:.3} from generation {}\n{}", best.fitness, best.generation, best.body.to_ascii());
    }
    Ok(())
}
