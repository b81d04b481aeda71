use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;

use super::Genome;

/// Probability that a gene disabled in either parent stays disabled.
const DISABLED_INHERITANCE: f64 = 0.75;

/// Orders two prospective parents as `(fitter, other)`.
///
/// Higher fitness wins; a missing fitness ranks below any value. Equal
/// fitness prefers the smaller genome, then the first argument.
pub fn order_parents<'a>(a: &'a Genome, b: &'a Genome) -> (&'a Genome, &'a Genome) {
    let fa = a.fitness.unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness.unwrap_or(f64::NEG_INFINITY);
    match fa.partial_cmp(&fb).unwrap_or(Ordering::Equal) {
        Ordering::Greater => (a, b),
        Ordering::Less => (b, a),
        Ordering::Equal if b.size() < a.size() => (b, a),
        Ordering::Equal => (a, b),
    }
}

/// NEAT crossover. Matching genes are taken from either parent at random;
/// disjoint and excess genes come from `fitter` only, so the child has
/// exactly the fitter parent's structure.
pub fn crossover<R: Rng + ?Sized>(fitter: &Genome, other: &Genome, rng: &mut R) -> Genome {
    let other_conns: HashMap<u64, _> = other.connections.iter().map(|c| (c.innovation, c)).collect();
    let connections = fitter
        .connections
        .iter()
        .map(|mine| match other_conns.get(&mine.innovation) {
            Some(theirs) => {
                let mut gene = if rng.random_bool(0.5) { mine.clone() } else { (*theirs).clone() };
                gene.enabled = if !mine.enabled || !theirs.enabled {
                    rng.random::<f64>() >= DISABLED_INHERITANCE
                } else {
                    true
                };
                gene
            }
            None => mine.clone(),
        })
        .collect();

    let nodes = fitter
        .nodes
        .iter()
        .map(|mine| match other.node(mine.id) {
            Some(theirs) if rng.random_bool(0.5) => theirs.clone(),
            _ => mine.clone(),
        })
        .collect();

    Genome {
        input_count: fitter.input_count,
        output_count: fitter.output_count,
        nodes,
        connections,
        fitness: None,
    }
}
