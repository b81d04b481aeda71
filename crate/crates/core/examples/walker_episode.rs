//! Run one walker episode with a hand-made body and a sine-wave controller.

use voxel_coevo::morphology::BodyGrid;
use voxel_coevo::network::Controller;
use voxel_coevo::tasks::{make_task, run_episode, TaskKind};

/// Open-loop gait: actuators pulse with a phase that runs along the body.
struct Gait {
    inputs: usize,
    step: std::sync::atomic::AtomicUsize,
}

impl Controller for Gait {
    fn input_count(&self) -> usize {
        self.inputs
    }

    fn output_count(&self) -> usize {
        25
    }

    fn act(&self, _observation: &[f64]) -> voxel_coevo::Result<Vec<f64>> {
        let t = self.step.fetch_add(1, std::sync::atomic::Ordering::Relaxed) as f64;
        Ok((0..25).map(|cell| (0.6 * t + (cell % 5) as f64).sin()).collect())
    }
}

fn main() -> voxel_coevo::Result<()> {
    let body = BodyGrid::from_rows(&[".....", ".....", "#HHH#", "V...V", "V...V"])?;
    let task = make_task(TaskKind::Walker).with_horizon(200);
    let gait = Gait { inputs: task.input_count(), step: Default::default() };
    let result = run_episode(&body, &gait, &task, true)?;
    println!("{}\n", body.to_ascii());
    println!("sensors: {:?}", task.sensor_layout());
    println!("fitness {:.4} over {} steps ({:?})", result.fitness, result.steps, result.termination);
    println!("displacement {:.4} m", result.displacement);
    for f in result.frames.iter().step_by(50) {
        let x = f.positions.iter().map(|p| p[0]).sum::<f64>() / f.positions.len() as f64;
        println!("  step {:>3}: mean point x {x:+.3}", f.step);
    }
    Ok(())
}
