//! The four evaluation environments: terrain, sensors, rewards and the
//! episode loop.

mod sensors;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::morphology::BodyGrid;
use crate::network::Controller;
use crate::physics::{Frame, KinematicsSummary, PhysicsParams, SimWorld, TerrainSpec, WorldSetup};
use crate::{Error, Result};

pub use sensors::{sense, sense_into, SensorBlock, SENSOR_STATIONS};

/// Fitness given to an episode aborted by a non-finite physics state.
pub const NAN_FITNESS_FLOOR: f64 = -100.0;
/// Seed of the obstacle course; fixed so every run sees the same terrain.
const OBSTACLE_SEED: u64 = 0x0b57_ac1e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Walker,
    ObstacleTraverser,
    Climber,
    Thrower,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Walker, TaskKind::ObstacleTraverser, TaskKind::Climber, TaskKind::Thrower];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Walker => "walker",
            TaskKind::ObstacleTraverser => "obstacle_traverser",
            TaskKind::Climber => "climber",
            TaskKind::Thrower => "thrower",
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            TaskKind::Walker => 500,
            TaskKind::ObstacleTraverser => 600,
            TaskKind::Climber => 400,
            TaskKind::Thrower => 300,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownTask(s.to_string()))
    }
}

/// Everything needed to run an episode of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub horizon: usize,
    pub grid_size: usize,
    pub setup: WorldSetup,
    pub sensors: Vec<SensorBlock>,
    pub physics: PhysicsParams,
    pub nan_fitness: f64,
}

/// Task with the standard 5×5 robot grid.
pub fn make_task(kind: TaskKind) -> TaskSpec {
    make_task_with(kind, 5)
}

pub fn make_task_with(kind: TaskKind, grid_size: usize) -> TaskSpec {
    let flat = TerrainSpec::Flat { height: 0.0 };
    let (setup, extra) = match kind {
        TaskKind::Walker => (WorldSetup::on(flat, 0.0), vec![]),
        TaskKind::ObstacleTraverser => (
            WorldSetup::on(obstacle_terrain(), 0.0),
            vec![SensorBlock::Orientation, SensorBlock::TerrainBelow],
        ),
        TaskKind::Climber => (
            WorldSetup { terrain: climber_channel(), start_x: 0.0, centered: true, with_box: false },
            vec![SensorBlock::Orientation, SensorBlock::LeftWall, SensorBlock::RightWall],
        ),
        TaskKind::Thrower => (
            WorldSetup { terrain: flat, start_x: 0.0, centered: false, with_box: true },
            vec![SensorBlock::BoxPosition, SensorBlock::BoxVelocity],
        ),
    };
    let mut sensors = vec![SensorBlock::ComVelocity, SensorBlock::VoxelPositions];
    sensors.extend(extra);
    TaskSpec {
        kind,
        horizon: kind.default_horizon(),
        grid_size,
        setup,
        sensors,
        physics: PhysicsParams::default(),
        nan_fitness: NAN_FITNESS_FLOOR,
    }
}

impl TaskSpec {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn input_count(&self) -> usize {
        self.sensors.iter().map(|s| s.size(self.grid_size)).sum()
    }

    /// One action per grid cell.
    pub fn output_count(&self) -> usize {
        self.grid_size * self.grid_size
    }

    /// Sensor names and sizes in input order.
    pub fn sensor_layout(&self) -> Vec<(&'static str, usize)> {
        self.sensors.iter().map(|s| (s.name(), s.size(self.grid_size))).collect()
    }

    pub fn terrain(&self) -> &TerrainSpec {
        &self.setup.terrain
    }

    /// Terrain description as pretty JSON, for external plotting.
    pub fn terrain_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.setup.terrain)?)
    }

    pub fn build_world(&self, body: &BodyGrid) -> Result<SimWorld> {
        if body.size() != self.grid_size {
            return Err(Error::DimensionMismatch(self.grid_size, body.size()));
        }
        SimWorld::build(body, &self.setup, &self.physics)
    }

    /// The quantity whose change is rewarded.
    pub fn measure(&self, k: &KinematicsSummary) -> f64 {
        match self.kind {
            TaskKind::Walker | TaskKind::ObstacleTraverser => k.com[0],
            TaskKind::Climber => k.com[1],
            TaskKind::Thrower => k.box_position.map_or(0.0, |b| b[0]),
        }
    }
}

/// Per-step reward: the change of the task's measure between two states.
pub fn reward(prev: &KinematicsSummary, next: &KinematicsSummary, task: &TaskSpec) -> f64 {
    task.measure(next) - task.measure(prev)
}

/// Bumpy course: flat run-up, then random mounds up to 6 cm high every
/// 20 cm, out to 12 m.
fn obstacle_terrain() -> TerrainSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(OBSTACLE_SEED);
    let (x0, dx) = (-2.0, 0.2);
    let heights = (0..71)
        .map(|i| {
            let x = x0 + i as f64 * dx;
            if x < 0.8 {
                0.0
            } else {
                // millimetre resolution keeps the JSON export short and exact
                (rng.random_range(0.0..0.06) * 1000.0f64).round() / 1000.0
            }
        })
        .collect();
    TerrainSpec::HeightField { x0, dx, heights }
}

fn climber_channel() -> TerrainSpec {
    TerrainSpec::Channel { floor: 0.0, left_x: -0.35, right_x: 0.35, step_height: 0.2, step_depth: 0.05 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    NanAbort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    /// Sum of per-step rewards, or the task's floor after a NaN abort.
    pub fitness: f64,
    pub steps: usize,
    pub termination: Termination,
    /// Final minus initial measure, computed directly from the two states.
    pub displacement: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub frames: Vec<Frame>,
}

/// Runs one episode: sense, act, apply, step, accumulate reward.
///
/// With `record` set, a frame is captured before every control step, so
/// frame 0 is the placement and there are exactly `steps` frames.
pub fn run_episode(body: &BodyGrid, controller: &dyn Controller, task: &TaskSpec, record: bool) -> Result<EpisodeResult> {
    let (inputs, outputs) = (task.input_count(), task.output_count());
    if controller.input_count() != inputs || controller.output_count() != outputs {
        return Err(Error::InvalidArgument(format!(
            "controller is {}x{}, task {} needs {inputs}x{outputs}",
            controller.input_count(),
            controller.output_count(),
            task.kind
        )));
    }
    let mut world = task.build_world(body)?;
    let mut prev = world.observe();
    let initial = task.measure(&prev);
    let mut fitness = 0.0;
    let mut frames = Vec::new();
    let mut obs = Vec::with_capacity(inputs);

    for step in 0..task.horizon {
        sense_into(&world, &prev, task, &mut obs);
        let actions = controller.act(&obs)?;
        world.apply_actions(&actions)?;
        if record {
            frames.push(world.frame());
        }
        if let Err(e) = world.step(task.physics.control_dt) {
            log::debug!("episode aborted at step {step}: {e}");
            return Ok(EpisodeResult {
                fitness: task.nan_fitness,
                steps: step + 1,
                termination: Termination::NanAbort,
                displacement: f64::NAN,
                frames,
            });
        }
        let next = world.observe();
        fitness += reward(&prev, &next, task);
        prev = next;
    }
    Ok(EpisodeResult {
        fitness,
        steps: task.horizon,
        termination: Termination::Horizon,
        displacement: task.measure(&prev) - initial,
        frames,
    })
}
