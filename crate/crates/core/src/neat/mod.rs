//! NEAT genotype: node and connection genes, historical markings, variation
//! operators and the compatibility distance used for speciation.

mod activation;
mod crossover;
mod distance;
mod genome;
mod innovation;
mod mutation;

pub use activation::Activation;
pub use crossover::{crossover, order_parents};
pub use distance::{genotypic_distance, DistanceCoefficients};
pub use genome::{minimal_innovation, new_minimal_genome, ConnectionGene, Genome, NodeGene, NodeId, NodeKind};
pub use innovation::InnovationRegistry;
pub use mutation::{mutate, MutationParams};
