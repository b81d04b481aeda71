use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::TaskSpec;
use crate::physics::{KinematicsSummary, SimWorld};

/// Samples taken along the robot for terrain and wall sensors.
pub const SENSOR_STATIONS: usize = 11;

const POSITION_SCALE: f64 = 0.5;
const VELOCITY_SCALE: f64 = 5.0;
const GAP_SCALE: f64 = 0.5;

/// One contiguous group of controller inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorBlock {
    /// Centre-of-mass velocity.
    ComVelocity,
    /// Each cell's voxel centre relative to the centre of mass, zero for
    /// empty cells.
    VoxelPositions,
    Orientation,
    /// Vertical gap between the robot's lowest point and the ground, at
    /// stations spread across its width.
    TerrainBelow,
    /// Horizontal gap to the left wall at stations spread over the robot's height.
    LeftWall,
    RightWall,
    /// Box centre relative to the robot's centre of mass.
    BoxPosition,
    BoxVelocity,
}

impl SensorBlock {
    pub fn name(self) -> &'static str {
        match self {
            SensorBlock::ComVelocity => "com_velocity",
            SensorBlock::VoxelPositions => "voxel_positions",
            SensorBlock::Orientation => "orientation",
            SensorBlock::TerrainBelow => "terrain_below",
            SensorBlock::LeftWall => "left_wall",
            SensorBlock::RightWall => "right_wall",
            SensorBlock::BoxPosition => "box_position",
            SensorBlock::BoxVelocity => "box_velocity",
        }
    }

    pub fn size(self, grid_size: usize) -> usize {
        match self {
            SensorBlock::ComVelocity | SensorBlock::BoxPosition | SensorBlock::BoxVelocity => 2,
            SensorBlock::VoxelPositions => 2 * grid_size * grid_size,
            SensorBlock::Orientation => 1,
            SensorBlock::TerrainBelow | SensorBlock::LeftWall | SensorBlock::RightWall => SENSOR_STATIONS,
        }
    }
}

fn stations(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..SENSOR_STATIONS).map(move |i| lo + (hi - lo) * i as f64 / (SENSOR_STATIONS - 1) as f64)
}

/// Observation vector for the current world state.
pub fn sense(world: &SimWorld, task: &TaskSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(task.input_count());
    sense_into(world, &world.observe(), task, &mut out);
    out
}

/// Like [`sense`], reusing a kinematics summary of the same state.
pub fn sense_into(world: &SimWorld, k: &KinematicsSummary, task: &TaskSpec, out: &mut Vec<f64>) {
    out.clear();
    let terrain = world.terrain();
    for block in &task.sensors {
        match block {
            SensorBlock::ComVelocity => out.extend(k.com_velocity.map(|v| v / VELOCITY_SCALE)),
            SensorBlock::VoxelPositions => {
                for (cell, c) in world.body().cells().iter().zip(&k.voxel_centers) {
                    if cell.is_empty() {
                        out.extend([0.0, 0.0]);
                    } else {
                        out.extend([(c[0] - k.com[0]) / POSITION_SCALE, (c[1] - k.com[1]) / POSITION_SCALE]);
                    }
                }
            }
            SensorBlock::Orientation => out.push(k.orientation / PI),
            SensorBlock::TerrainBelow => {
                for x in stations(k.bounds_min[0], k.bounds_max[0]) {
                    let ground = terrain.ground_height(x).unwrap_or(0.0);
                    out.push((k.bounds_min[1] - ground) / GAP_SCALE);
                }
            }
            SensorBlock::LeftWall | SensorBlock::RightWall => {
                let left = *block == SensorBlock::LeftWall;
                for y in stations(k.bounds_min[1], k.bounds_max[1]) {
                    let gap = match terrain.walls_at(y) {
                        Some((l, _)) if left => k.bounds_min[0] - l,
                        Some((_, r)) => r - k.bounds_max[0],
                        None => 0.0,
                    };
                    out.push(gap / GAP_SCALE);
                }
            }
            SensorBlock::BoxPosition => {
                let b = k.box_position.unwrap_or(k.com);
                out.extend([(b[0] - k.com[0]) / POSITION_SCALE, (b[1] - k.com[1]) / POSITION_SCALE]);
            }
            SensorBlock::BoxVelocity => out.extend(k.box_velocity.unwrap_or([0.0; 2]).map(|v| v / VELOCITY_SCALE)),
        }
    }
}
