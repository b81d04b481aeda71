//! Evolve briefly, then export the champion's trajectory as JSON lines.
//!
//!     cargo run --release --example replay_trace -- /tmp/walker.jsonl

use std::path::PathBuf;

use voxel_coevo::cli::export_replay;
use voxel_coevo::evolution::{evolve, EvolutionConfig};
use voxel_coevo::tasks::TaskKind;

fn main() -> voxel_coevo::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "replay.jsonl".into()).into();
    let cfg = EvolutionConfig { population: 16, generations: 5, horizon: Some(120), seed: 4, ..Default::default() };
    let task = cfg.task(TaskKind::Walker);
    let run = evolve(&cfg, &task)?;
    let Some(best) = run.best else {
        println!("no valid body was found");
        return Ok(());
    };
    let frames = export_replay(&best, &task, &out)?;
    println!("champion fitness {:.3}, {frames} frames written to {}", best.fitness, out.display());
    Ok(())
}
