//! Compare HyperNEAT with the direct-encoding and nested-loop baselines at
//! one episode budget.
//!
//!     cargo run --release --example baselines -- 720

use voxel_coevo::evolution::{run_algorithm, Algorithm, EvolutionConfig};
use voxel_coevo::tasks::TaskKind;

fn main() -> voxel_coevo::Result<()> {
    let budget = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(480);
    let cfg = EvolutionConfig {
        population: 24,
        generations: 10_000,
        horizon: Some(200),
        max_evaluations: Some(budget),
        seed: 2,
        ..Default::default()
    };
    let task = cfg.task(TaskKind::Walker);
    println!("budget {budget} episodes, walker, 200 steps");
    for alg in [Algorithm::Hyperneat, Algorithm::Direct, Algorithm::Nested] {
        let run = run_algorithm(alg, &cfg, &task, &mut |_| Ok(()))?;
        let best = run.best.as_ref().map_or(f64::NAN, |c| c.fitness);
        let spent = run.stats.last().map_or(0, |s| s.evaluations_cumulative);
        println!("{:<10} best {best:>8.3} after {:>3} generations, {spent} episodes", alg.name(), run.stats.len());
    }
    Ok(())
}
