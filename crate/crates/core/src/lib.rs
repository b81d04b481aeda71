//! Co-evolution of body and controller for 2D voxel-based soft robots.
//!
//! A single NEAT-evolved CPPN is queried over a two-part 3D substrate. The
//! part with positive `z` becomes a small network that paints the robot body
//! voxel by voxel; the part with negative `z` becomes the controller that maps
//! task sensors to one actuation value per voxel. Robots are scored in a
//! deterministic mass-spring simulator on four tasks and speciated with a
//! distance that adds a body term to the usual NEAT genome distance.
//!
//! Module map:
//!
//! - [`neat`]: genomes, innovation registry, mutation, crossover, genome distance
//! - [`network`]: compiled CPPNs and dense layered networks
//! - [`hyperneat`]: substrates and genome expression into two networks
//! - [`morphology`]: voxel grids, decoding, validity, body distance
//! - [`physics`]: mass-spring world, actuation, contacts, integration
//! - [`tasks`]: Walker, ObstacleTraverser, Climber, Thrower environments
//! - [`evolution`]: the generational loop, hybrid speciation, baselines
//! - [`cli`]: the `coevo` command line front end
//!
//! Runnable walkthroughs live under `examples/`.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod hyperneat;
pub mod morphology;
pub mod neat;
pub mod network;
pub mod physics;
pub mod tasks;

pub use error::{Error, Result};
