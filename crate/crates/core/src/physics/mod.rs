//! Deterministic 2D mass-spring simulation of voxel soft bodies.
//!
//! Every occupied voxel is a square of four corner masses joined by four
//! edge springs and two diagonal springs; neighbouring voxels share corners
//! and edges. Actuators change the rest lengths of their springs. Integration
//! is semi-implicit Euler with fixed substeps, and terrain contact projects
//! penetrating points back to the surface with Coulomb friction.

mod contact;
mod terrain;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::morphology::{BodyGrid, VoxelType};
use crate::{Error, Result};

pub use terrain::{Contact, TerrainSpec, Vec2};

/// Simulation constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Voxel edge length, metres.
    pub voxel_size: f64,
    /// Mass of one voxel, kg, split evenly over its corners.
    pub voxel_mass: f64,
    pub rigid_stiffness: f64,
    /// Stiffness of soft and actuator voxels.
    pub soft_stiffness: f64,
    pub damping: f64,
    pub gravity: f64,
    pub control_dt: f64,
    pub substeps: usize,
    pub friction: f64,
    /// Actuation scale is `action_center + action_gain · action`.
    pub action_center: f64,
    pub action_gain: f64,
    pub max_speed: f64,
    /// Clearance between the lowest robot point and the terrain at start.
    pub drop_clearance: f64,
    pub box_size: f64,
    pub box_mass: f64,
    /// Penalty stiffness and damping for robot/box contact.
    pub contact_stiffness: f64,
    pub contact_damping: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            voxel_size: 0.1,
            voxel_mass: 1.0,
            rigid_stiffness: 6.0e4,
            soft_stiffness: 2.0e4,
            damping: 30.0,
            gravity: -9.8,
            control_dt: 0.05,
            substeps: 30,
            friction: 0.5,
            action_center: 1.1,
            action_gain: 0.5,
            max_speed: 50.0,
            drop_clearance: 0.01,
            box_size: 0.1,
            box_mass: 1.0,
            contact_stiffness: 2.0e4,
            contact_damping: 10.0,
        }
    }
}

impl PhysicsParams {
    pub fn substep(&self, control_dt: f64) -> f64 {
        control_dt / self.substeps as f64
    }

    pub fn actuation_scale(&self, action: f64) -> f64 {
        self.action_center + self.action_gain * action.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassPoint {
    pub position: Vec2,
    pub velocity: Vec2,
    pub mass: f64,
    pub force: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringKind {
    HorizontalEdge,
    VerticalEdge,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spring {
    pub endpoints: [usize; 2],
    pub base_rest: f64,
    pub rest: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub kind: SpringKind,
    /// Grid cells owning this spring; a shared edge has two owners.
    pub owners: [Option<usize>; 2],
}

/// Where to put the robot when a world is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSetup {
    pub terrain: TerrainSpec,
    /// Left edge of the body, or its centre when `centered` is set.
    pub start_x: f64,
    #[serde(default)]
    pub centered: bool,
    /// Add a free box resting on top of the robot.
    #[serde(default)]
    pub with_box: bool,
}

impl WorldSetup {
    pub fn on(terrain: TerrainSpec, start_x: f64) -> Self {
        Self { terrain, start_x, centered: false, with_box: false }
    }
}

/// Summary of the robot (and box) state used by sensors and rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicsSummary {
    pub com: Vec2,
    pub com_velocity: Vec2,
    /// Centre of each grid cell's voxel, row-major; zero for empty cells.
    pub voxel_centers: Vec<Vec2>,
    /// Angle of the line from the left-half to the right-half centre of mass.
    pub orientation: f64,
    pub bounds_min: Vec2,
    pub bounds_max: Vec2,
    pub box_position: Option<Vec2>,
    pub box_velocity: Option<Vec2>,
}

/// Positions and actuation at one control step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub step: usize,
    pub positions: Vec<Vec2>,
    /// Per grid cell action, zero for cells that are not actuators.
    pub actuation: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub box_position: Option<Vec2>,
}

#[derive(Debug, Clone)]
pub(crate) struct BoxBody {
    /// Corner indices in counter-clockwise order.
    pub corners: [usize; 4],
}

/// Full physical state of one episode.
#[derive(Debug, Clone)]
pub struct SimWorld {
    params: PhysicsParams,
    terrain: TerrainSpec,
    body: BodyGrid,
    points: Vec<MassPoint>,
    springs: Vec<Spring>,
    /// Robot points are `0..robot_points`; box corners follow.
    robot_points: usize,
    /// Corner indices (counter-clockwise from bottom-left) per occupied cell.
    voxel_corners: Vec<Option<[usize; 4]>>,
    /// `true` for robot points left of the initial centre of mass, `false`
    /// right of it, `None` on the centre line.
    halves: Vec<Option<bool>>,
    actuation: Vec<f64>,
    boxed: Option<BoxBody>,
    time: f64,
    substeps_done: u64,
    control_steps: usize,
    contacts_scratch: Vec<Contact>,
}

impl SimWorld {
    /// Builds the lattice for `body` and places it according to `setup`.
    pub fn build(body: &BodyGrid, setup: &WorldSetup, params: &PhysicsParams) -> Result<Self> {
        body.validate().map_err(Error::InvalidBody)?;
        let n = body.size();
        let s = params.voxel_size;
        let corner_mass = params.voxel_mass / 4.0;

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut points: Vec<MassPoint> = Vec::new();
        let mut voxel_corners = vec![None; n * n];
        let mut springs: Vec<Spring> = Vec::new();
        let mut spring_index: HashMap<(usize, usize), usize> = HashMap::new();

        for row in 0..n {
            for col in 0..n {
                let voxel = body.get(row, col);
                if voxel.is_empty() {
                    continue;
                }
                let cell = row * n + col;
                // lattice corner (r, c) sits at x = c·s, y = (n - r)·s
                let mut corner = |r: usize, c: usize| {
                    let id = *index.entry((r, c)).or_insert_with(|| {
                        points.push(MassPoint {
                            position: [c as f64 * s, (n - r) as f64 * s],
                            velocity: [0.0; 2],
                            mass: 0.0,
                            force: [0.0; 2],
                        });
                        points.len() - 1
                    });
                    points[id].mass += corner_mass;
                    id
                };
                let bl = corner(row + 1, col);
                let br = corner(row + 1, col + 1);
                let tr = corner(row, col + 1);
                let tl = corner(row, col);
                voxel_corners[cell] = Some([bl, br, tr, tl]);

                let stiffness = match voxel {
                    VoxelType::Rigid => params.rigid_stiffness,
                    _ => params.soft_stiffness,
                };
                let diag = s * std::f64::consts::SQRT_2;
                for (a, b, kind, rest) in [
                    (tl, tr, SpringKind::HorizontalEdge, s),
                    (bl, br, SpringKind::HorizontalEdge, s),
                    (tl, bl, SpringKind::VerticalEdge, s),
                    (tr, br, SpringKind::VerticalEdge, s),
                    (tl, br, SpringKind::Diagonal, diag),
                    (tr, bl, SpringKind::Diagonal, diag),
                ] {
                    let key = (a.min(b), a.max(b));
                    match spring_index.get(&key) {
                        Some(&i) => {
                            let spring = &mut springs[i];
                            spring.owners[1] = Some(cell);
                            spring.stiffness = spring.stiffness.max(stiffness);
                        }
                        None => {
                            spring_index.insert(key, springs.len());
                            springs.push(Spring {
                                endpoints: [a, b],
                                base_rest: rest,
                                rest,
                                stiffness,
                                damping: params.damping,
                                kind,
                                owners: [Some(cell), None],
                            });
                        }
                    }
                }
            }
        }

        let robot_points = points.len();
        let mut world = Self {
            params: params.clone(),
            terrain: setup.terrain.clone(),
            body: body.clone(),
            points,
            springs,
            robot_points,
            voxel_corners,
            halves: Vec::new(),
            actuation: vec![0.0; n * n],
            boxed: None,
            time: 0.0,
            substeps_done: 0,
            control_steps: 0,
            contacts_scratch: Vec::with_capacity(2),
        };
        world.place(setup);
        if setup.with_box {
            world.add_box();
        }
        let com_x = world.robot_com()[0];
        world.halves = world.points[..robot_points]
            .iter()
            .map(|p| {
                let dx = p.position[0] - com_x;
                if dx.abs() < 1e-12 {
                    None
                } else {
                    Some(dx < 0.0)
                }
            })
            .collect();
        world.apply_actions(&vec![0.0; n * n])?;
        Ok(world)
    }

    fn place(&mut self, setup: &WorldSetup) {
        let (min, max) = self.robot_bounds();
        let width = max[0] - min[0];
        let left = if setup.centered { setup.start_x - width / 2.0 } else { setup.start_x };
        let ground = self.terrain.max_ground_height(left, left + width).unwrap_or(0.0);
        let dx = left - min[0];
        let dy = ground + self.params.drop_clearance - min[1];
        self.translate(dx, dy);
    }

    fn add_box(&mut self) {
        let (min, max) = self.robot_bounds();
        let size = self.params.box_size;
        let cx = (min[0] + max[0]) / 2.0;
        let y0 = max[1] + 1e-3;
        let m = self.params.box_mass / 4.0;
        let first = self.points.len();
        for (x, y) in [(cx - size / 2.0, y0), (cx + size / 2.0, y0), (cx + size / 2.0, y0 + size), (cx - size / 2.0, y0 + size)] {
            self.points.push(MassPoint { position: [x, y], velocity: [0.0; 2], mass: m, force: [0.0; 2] });
        }
        let c = [first, first + 1, first + 2, first + 3];
        let diag = size * std::f64::consts::SQRT_2;
        for (a, b, kind, rest) in [
            (c[0], c[1], SpringKind::HorizontalEdge, size),
            (c[3], c[2], SpringKind::HorizontalEdge, size),
            (c[0], c[3], SpringKind::VerticalEdge, size),
            (c[1], c[2], SpringKind::VerticalEdge, size),
            (c[0], c[2], SpringKind::Diagonal, diag),
            (c[1], c[3], SpringKind::Diagonal, diag),
        ] {
            self.springs.push(Spring {
                endpoints: [a, b],
                base_rest: rest,
                rest,
                stiffness: self.params.rigid_stiffness,
                damping: self.params.damping,
                kind,
                owners: [None, None],
            });
        }
        self.boxed = Some(BoxBody { corners: c });
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn terrain(&self) -> &TerrainSpec {
        &self.terrain
    }

    pub fn body(&self) -> &BodyGrid {
        &self.body
    }

    pub fn points(&self) -> &[MassPoint] {
        &self.points
    }

    pub fn springs(&self) -> &[Spring] {
        &self.springs
    }

    pub fn robot_point_count(&self) -> usize {
        self.robot_points
    }

    pub fn has_box(&self) -> bool {
        self.boxed.is_some()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn control_steps(&self) -> usize {
        self.control_steps
    }

    pub fn translate(&mut self, dx: f64, dy: f64) {
        for p in &mut self.points {
            p.position[0] += dx;
            p.position[1] += dy;
        }
    }

    /// Sets every point's velocity, box included.
    pub fn set_uniform_velocity(&mut self, v: Vec2) {
        for p in &mut self.points {
            p.velocity = v;
        }
    }

    pub fn points_mut(&mut self) -> &mut [MassPoint] {
        &mut self.points
    }

    /// Sets actuator rest lengths from one action per grid cell.
    ///
    /// Actuator cells map their action `u` to a scale `a = center + gain·u`.
    /// A horizontal actuator scales its horizontal edges by `a` and its
    /// diagonals by `sqrt((a² + 1) / 2)`; vertical actuators act on vertical
    /// edges. A spring shared by two cells takes the mean of their factors.
    pub fn apply_actions(&mut self, actions: &[f64]) -> Result<()> {
        let cells = self.body.size() * self.body.size();
        if actions.len() != cells {
            return Err(Error::LengthMismatch { expected: cells, got: actions.len() });
        }
        for (cell, (&u, slot)) in actions.iter().zip(self.actuation.iter_mut()).enumerate() {
            *slot = if self.body.cells()[cell].is_actuator() { u.clamp(-1.0, 1.0) } else { 0.0 };
        }
        let body = &self.body;
        let params = &self.params;
        let actuation = &self.actuation;
        let factor = |cell: usize, kind: SpringKind| -> f64 {
            let voxel = body.cells()[cell];
            let a = params.actuation_scale(actuation[cell]);
            let along = match (voxel, kind) {
                (VoxelType::HorizontalActuator, SpringKind::HorizontalEdge) => true,
                (VoxelType::VerticalActuator, SpringKind::VerticalEdge) => true,
                (VoxelType::HorizontalActuator | VoxelType::VerticalActuator, SpringKind::Diagonal) => {
                    return ((a * a + 1.0) / 2.0).sqrt();
                }
                _ => false,
            };
            if along {
                a
            } else {
                1.0
            }
        };
        for spring in &mut self.springs {
            let (sum, count) = spring
                .owners
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, c), &cell| (s + factor(cell, spring.kind), c + 1));
            if count > 0 {
                spring.rest = spring.base_rest * sum / count as f64;
            }
        }
        Ok(())
    }

    /// Advances one control interval of `control_dt` seconds in
    /// `params.substeps` semi-implicit Euler substeps.
    pub fn step(&mut self, control_dt: f64) -> Result<()> {
        let h = self.params.substep(control_dt);
        for _ in 0..self.params.substeps {
            self.substep(h)?;
        }
        self.control_steps += 1;
        Ok(())
    }

    fn substep(&mut self, h: f64) -> Result<()> {
        let g = self.params.gravity;
        for p in &mut self.points {
            p.force = [0.0, p.mass * g];
        }
        for s in &self.springs {
            let [a, b] = s.endpoints;
            let (pa, pb) = (&self.points[a], &self.points[b]);
            let d = [pb.position[0] - pa.position[0], pb.position[1] - pa.position[1]];
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len < 1e-12 {
                continue;
            }
            let u = [d[0] / len, d[1] / len];
            let rel_v = (pb.velocity[0] - pa.velocity[0]) * u[0] + (pb.velocity[1] - pa.velocity[1]) * u[1];
            let f = s.stiffness * (len - s.rest) + s.damping * rel_v;
            let fx = f * u[0];
            let fy = f * u[1];
            self.points[a].force[0] += fx;
            self.points[a].force[1] += fy;
            self.points[b].force[0] -= fx;
            self.points[b].force[1] -= fy;
        }
        if let Some(boxed) = &self.boxed {
            contact::box_robot_forces(
                &mut self.points,
                self.robot_points,
                &self.voxel_corners,
                &boxed.corners,
                self.params.contact_stiffness,
                self.params.contact_damping,
                self.params.friction,
            );
        }

        let max_speed = self.params.max_speed;
        for p in &mut self.points {
            p.velocity[0] += h * p.force[0] / p.mass;
            p.velocity[1] += h * p.force[1] / p.mass;
            let speed = (p.velocity[0] * p.velocity[0] + p.velocity[1] * p.velocity[1]).sqrt();
            if speed > max_speed {
                let k = max_speed / speed;
                p.velocity[0] *= k;
                p.velocity[1] *= k;
            }
            p.position[0] += h * p.velocity[0];
            p.position[1] += h * p.velocity[1];
        }

        let mu = self.params.friction;
        for p in &mut self.points {
            self.terrain.contacts(p.position, &mut self.contacts_scratch);
            for c in &self.contacts_scratch {
                resolve_contact(p, c, mu);
            }
        }

        self.substeps_done += 1;
        self.time += h;
        for (i, p) in self.points.iter().enumerate() {
            if !(p.position[0].is_finite() && p.position[1].is_finite() && p.velocity[0].is_finite() && p.velocity[1].is_finite()) {
                return Err(Error::NonFinite { substep: self.substeps_done, point: i });
            }
        }
        Ok(())
    }

    fn robot_com(&self) -> Vec2 {
        weighted_mean(&self.points[..self.robot_points], |p| p.position)
    }

    fn robot_bounds(&self) -> (Vec2, Vec2) {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &self.points[..self.robot_points] {
            for k in 0..2 {
                min[k] = min[k].min(p.position[k]);
                max[k] = max[k].max(p.position[k]);
            }
        }
        (min, max)
    }

    pub fn observe(&self) -> KinematicsSummary {
        let robot = &self.points[..self.robot_points];
        let com = weighted_mean(robot, |p| p.position);
        let com_velocity = weighted_mean(robot, |p| p.velocity);
        let voxel_centers = self
            .voxel_corners
            .iter()
            .map(|corners| match corners {
                Some(c) => {
                    let mut acc = [0.0; 2];
                    for &i in c {
                        acc[0] += self.points[i].position[0];
                        acc[1] += self.points[i].position[1];
                    }
                    [acc[0] / 4.0, acc[1] / 4.0]
                }
                None => [0.0; 2],
            })
            .collect();

        let half_com = |left: bool| {
            let mut acc = [0.0; 3];
            for (p, half) in robot.iter().zip(&self.halves) {
                if *half == Some(left) {
                    acc[0] += p.mass * p.position[0];
                    acc[1] += p.mass * p.position[1];
                    acc[2] += p.mass;
                }
            }
            (acc[2] > 0.0).then(|| [acc[0] / acc[2], acc[1] / acc[2]])
        };
        let orientation = match (half_com(true), half_com(false)) {
            (Some(l), Some(r)) => (r[1] - l[1]).atan2(r[0] - l[0]),
            _ => 0.0,
        };
        let (bounds_min, bounds_max) = self.robot_bounds();
        let (box_position, box_velocity) = match &self.boxed {
            Some(b) => {
                let corners: Vec<&MassPoint> = b.corners.iter().map(|&i| &self.points[i]).collect();
                let mean = |f: fn(&MassPoint) -> Vec2| {
                    let mut acc = [0.0; 2];
                    for p in &corners {
                        let v = f(p);
                        acc[0] += v[0] / 4.0;
                        acc[1] += v[1] / 4.0;
                    }
                    acc
                };
                (Some(mean(|p| p.position)), Some(mean(|p| p.velocity)))
            }
            None => (None, None),
        };
        KinematicsSummary { com, com_velocity, voxel_centers, orientation, bounds_min, bounds_max, box_position, box_velocity }
    }

    pub fn frame(&self) -> Frame {
        Frame {
            step: self.control_steps,
            positions: self.points[..self.robot_points].iter().map(|p| p.position).collect(),
            actuation: self.actuation.clone(),
            box_position: self.observe().box_position,
        }
    }

    /// Sum of `m·v` over all points.
    pub fn momentum(&self) -> Vec2 {
        self.points.iter().fold([0.0; 2], |acc, p| [acc[0] + p.mass * p.velocity[0], acc[1] + p.mass * p.velocity[1]])
    }
}

fn weighted_mean(points: &[MassPoint], f: impl Fn(&MassPoint) -> Vec2) -> Vec2 {
    let mut acc = [0.0; 3];
    for p in points {
        let v = f(p);
        acc[0] += p.mass * v[0];
        acc[1] += p.mass * v[1];
        acc[2] += p.mass;
    }
    [acc[0] / acc[2], acc[1] / acc[2]]
}

/// Projects `p` out of the contact, kills inbound normal velocity and
/// applies Coulomb friction to the tangential part.
fn resolve_contact(p: &mut MassPoint, c: &Contact, mu: f64) {
    let n = c.normal;
    p.position[0] += c.depth * n[0];
    p.position[1] += c.depth * n[1];
    let vn = p.velocity[0] * n[0] + p.velocity[1] * n[1];
    if vn >= 0.0 {
        return;
    }
    let vt = [p.velocity[0] - vn * n[0], p.velocity[1] - vn * n[1]];
    let vt_len = (vt[0] * vt[0] + vt[1] * vt[1]).sqrt();
    let budget = mu * -vn;
    let scale = if vt_len <= budget { 0.0 } else { 1.0 - budget / vt_len };
    p.velocity = [vt[0] * scale, vt[1] * scale];
}
