//! Network evaluation: genomes compiled into CPPN evaluation plans, and the
//! dense layered networks produced by substrate queries.

mod cppn;
mod layered;

pub use cppn::CompiledCppn;
pub use layered::LayeredNetwork;

/// Anything that maps an observation to an actuation vector.
pub trait Controller: Send + Sync {
    fn input_count(&self) -> usize;
    fn output_count(&self) -> usize;
    fn act(&self, observation: &[f64]) -> crate::Result<Vec<f64>>;
}
