//! The split 3D substrate and genome expression.
//!
//! One CPPN with inputs `(x1, y1, z1, x2, y2, z2, bias)` is queried over two
//! disjoint substrates. Morphology layers sit at `z = 1, 2, 3` and controller
//! layers at `z = -1, -2, -3`, so the sign of `z` tells the CPPN which network
//! it is painting. No connection ever crosses between the two halves.

use serde::{Deserialize, Serialize};

use crate::neat::Genome;
use crate::network::{CompiledCppn, LayeredNetwork};
use crate::{Error, Result};

pub type Point3 = [f64; 3];

/// Expressed weights are clipped to `[-MAX_WEIGHT, MAX_WEIGHT]`.
pub const MAX_WEIGHT: f64 = 3.0;
/// Value fed to the CPPN's bias input.
pub const BIAS_INPUT: f64 = 1.0;
/// Number of CPPN inputs: two 3D points plus the bias.
pub const CPPN_INPUTS: usize = 7;

pub const MORPHOLOGY_LAYERS: [usize; 3] = [2, 3, 5];
pub const MORPHOLOGY_Z: [f64; 3] = [1.0, 2.0, 3.0];
pub const CONTROLLER_Z: [f64; 3] = [-1.0, -2.0, -3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubstrateRole {
    Morphology,
    Controller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub role: SubstrateRole,
    pub layers: Vec<Vec<Point3>>,
}

impl Substrate {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }
}

/// The two networks grown from one genome.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomePhenotypes {
    pub morphology: LayeredNetwork,
    pub controller: LayeredNetwork,
}

/// `i`-th of `count` evenly spaced values over `[-1, 1]`; a single value sits at 0.
fn spread(i: usize, count: usize) -> f64 {
    if count <= 1 {
        0.0
    } else {
        -1.0 + 2.0 * i as f64 / (count - 1) as f64
    }
}

/// Row-major `side × side` raster over `[-1, 1]²` with row 0 at `y = +1`,
/// matching the orientation of the body grid.
fn raster(count: usize, side: usize, z: f64) -> Vec<Point3> {
    (0..count).map(|k| [spread(k % side, side), spread(side - 1 - k / side, side), z]).collect()
}

/// Builds `(morphology, controller)` substrates.
///
/// The controller's hidden and output layers are `grid_size × grid_size`
/// grids; its input layer is a `⌈√n⌉`-wide raster filled row-major with the
/// `task_input_count` sensors.
pub fn build_substrates(task_input_count: usize, grid_size: usize) -> Result<(Substrate, Substrate)> {
    if task_input_count == 0 || grid_size == 0 {
        return Err(Error::InvalidArgument(format!(
            "substrate sizes must be positive (inputs {task_input_count}, grid {grid_size})"
        )));
    }
    let morphology = Substrate {
        role: SubstrateRole::Morphology,
        layers: MORPHOLOGY_LAYERS
            .iter()
            .zip(MORPHOLOGY_Z)
            .map(|(&n, z)| (0..n).map(|i| [spread(i, n), 0.0, z]).collect())
            .collect(),
    };

    let side = (task_input_count as f64).sqrt().ceil() as usize;
    let cells = grid_size * grid_size;
    let controller = Substrate {
        role: SubstrateRole::Controller,
        layers: vec![
            raster(task_input_count, side, CONTROLLER_Z[0]),
            raster(cells, grid_size, CONTROLLER_Z[1]),
            raster(cells, grid_size, CONTROLLER_Z[2]),
        ],
    };
    Ok((morphology, controller))
}

/// CPPN output for the link `p1 → p2`, clipped to `±MAX_WEIGHT`.
pub fn query_weight(cppn: &CompiledCppn, p1: Point3, p2: Point3) -> Result<f64> {
    let out = cppn.activate(&cppn_inputs(p1, p2))?;
    Ok(clip_weight(out[0]))
}

fn cppn_inputs(p1: Point3, p2: Point3) -> [f64; CPPN_INPUTS] {
    [p1[0], p1[1], p1[2], p2[0], p2[1], p2[2], BIAS_INPUT]
}

fn clip_weight(w: f64) -> f64 {
    // a NaN output would only come from a broken genome; treat it as no link
    if w.is_nan() {
        0.0
    } else {
        w.clamp(-MAX_WEIGHT, MAX_WEIGHT)
    }
}

/// Fills a layered network by querying every adjacent-layer node pair once.
/// `query` receives `(from, to)` coordinates and its result is used verbatim.
pub fn express_substrate(substrate: &Substrate, mut query: impl FnMut(Point3, Point3) -> f64) -> Result<LayeredNetwork> {
    let sizes = substrate.layer_sizes();
    let mut net = LayeredNetwork::zeros(&sizes)?;
    for (k, pair) in substrate.layers.windows(2).enumerate() {
        for (to, &p2) in pair[1].iter().enumerate() {
            for (from, &p1) in pair[0].iter().enumerate() {
                net.set_weight(k, to, from, query(p1, p2));
            }
        }
    }
    Ok(net)
}

/// Expresses a 7-input CPPN genome into its morphology and controller networks.
pub fn express(genome: &Genome, substrates: &(Substrate, Substrate)) -> Result<GenomePhenotypes> {
    let cppn = compile_checked(genome)?;
    let mut query = cached_query(&cppn);
    let morphology = express_substrate(&substrates.0, &mut query)?;
    let controller = express_substrate(&substrates.1, &mut query)?;
    Ok(GenomePhenotypes { morphology, controller })
}

/// Expresses a genome over one substrate only.
pub fn express_single(genome: &Genome, substrate: &Substrate) -> Result<LayeredNetwork> {
    let cppn = compile_checked(genome)?;
    express_substrate(substrate, cached_query(&cppn))
}

fn compile_checked(genome: &Genome) -> Result<CompiledCppn> {
    if genome.input_count != CPPN_INPUTS || genome.output_count != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a {CPPN_INPUTS}-input, 1-output CPPN, got {}x{}",
            genome.input_count, genome.output_count
        )));
    }
    CompiledCppn::compile(genome)
}

fn cached_query(cppn: &CompiledCppn) -> impl FnMut(Point3, Point3) -> f64 + '_ {
    let mut scratch = Vec::with_capacity(cppn.slot_count());
    let mut out = [0.0];
    move |p1, p2| {
        cppn.activate_into(&cppn_inputs(p1, p2), &mut scratch, &mut out).expect("input size checked at compile");
        clip_weight(out[0])
    }
}
