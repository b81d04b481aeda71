use serde::{Deserialize, Serialize};

use super::Genome;

/// Genomes with fewer connection genes than this are not size-normalized.
const SMALL_GENOME: usize = 20;

/// Coefficients of the NEAT compatibility distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceCoefficients {
    pub excess: f64,
    pub disjoint: f64,
    pub weight: f64,
}

impl Default for DistanceCoefficients {
    fn default() -> Self {
        Self { excess: 1.0, disjoint: 1.0, weight: 0.5 }
    }
}

/// `c1·E/N + c2·D/N + c3·W̄` over connection genes aligned by innovation.
///
/// `E` counts genes beyond the other genome's highest innovation, `D` the
/// remaining unmatched genes and `W̄` the mean absolute weight difference of
/// matching genes. `N` is the larger gene count, or 1 when both genomes have
/// fewer than 20 connection genes.
pub fn genotypic_distance(a: &Genome, b: &Genome, c: DistanceCoefficients) -> f64 {
    let (xs, ys) = (&a.connections, &b.connections);
    let max_a = xs.last().map(|g| g.innovation);
    let max_b = ys.last().map(|g| g.innovation);

    let (mut i, mut j) = (0, 0);
    let (mut excess, mut disjoint, mut matching) = (0usize, 0usize, 0usize);
    let mut weight_diff = 0.0;
    let mut unmatched = |innovation: u64, other_max: Option<u64>| match other_max {
        Some(m) if innovation <= m => disjoint += 1,
        _ => excess += 1,
    };
    while i < xs.len() || j < ys.len() {
        match (xs.get(i), ys.get(j)) {
            (Some(x), Some(y)) if x.innovation == y.innovation => {
                weight_diff += (x.weight - y.weight).abs();
                matching += 1;
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.innovation < y.innovation => {
                unmatched(x.innovation, max_b);
                i += 1;
            }
            (Some(_), Some(y)) => {
                unmatched(y.innovation, max_a);
                j += 1;
            }
            (Some(x), None) => {
                unmatched(x.innovation, max_b);
                i += 1;
            }
            (None, Some(y)) => {
                unmatched(y.innovation, max_a);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let larger = xs.len().max(ys.len());
    let n = if larger < SMALL_GENOME { 1.0 } else { larger as f64 };
    let mean_weight = if matching > 0 { weight_diff / matching as f64 } else { 0.0 };
    c.excess * excess as f64 / n + c.disjoint * disjoint as f64 / n + c.weight * mean_weight
}
