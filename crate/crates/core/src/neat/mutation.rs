use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Activation, ConnectionGene, Genome, InnovationRegistry, NodeGene, NodeKind};

/// Mutation rates and magnitudes. Defaults follow the CPPN-NEAT settings the
/// single-genome method was run with (high mutation rates for diversity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutationParams {
    pub activation_default: Activation,
    pub activation_mutate_rate: f64,
    pub activation_options: Vec<Activation>,
    pub bias_mutate_power: f64,
    pub bias_mutate_rate: f64,
    pub bias_replace_rate: f64,
    pub conn_add_prob: f64,
    pub conn_delete_prob: f64,
    pub node_add_prob: f64,
    pub node_delete_prob: f64,
    pub weight_mutate_power: f64,
    pub weight_mutate_rate: f64,
    pub weight_replace_rate: f64,
    /// Weights and biases are clamped to `[-value_limit, value_limit]`.
    pub value_limit: f64,
    /// Fresh weights and biases are drawn uniformly from `[-init_range, init_range]`.
    pub init_range: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        Self {
            activation_default: Activation::Tanh,
            activation_mutate_rate: 0.2,
            activation_options: Activation::ALL.to_vec(),
            bias_mutate_power: 0.2,
            bias_mutate_rate: 0.8,
            bias_replace_rate: 0.2,
            conn_add_prob: 0.2,
            conn_delete_prob: 0.2,
            node_add_prob: 0.2,
            node_delete_prob: 0.2,
            weight_mutate_power: 0.2,
            weight_mutate_rate: 0.8,
            weight_replace_rate: 0.2,
            value_limit: 8.0,
            init_range: 1.0,
        }
    }
}

impl MutationParams {
    /// Every rate set to zero; mutation becomes the identity.
    pub fn none() -> Self {
        Self {
            activation_mutate_rate: 0.0,
            bias_mutate_rate: 0.0,
            bias_replace_rate: 0.0,
            conn_add_prob: 0.0,
            conn_delete_prob: 0.0,
            node_add_prob: 0.0,
            node_delete_prob: 0.0,
            weight_mutate_rate: 0.0,
            weight_replace_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn rates(&self) -> [(&'static str, f64); 9] {
        [
            ("activation_mutate_rate", self.activation_mutate_rate),
            ("bias_mutate_rate", self.bias_mutate_rate),
            ("bias_replace_rate", self.bias_replace_rate),
            ("conn_add_prob", self.conn_add_prob),
            ("conn_delete_prob", self.conn_delete_prob),
            ("node_add_prob", self.node_add_prob),
            ("node_delete_prob", self.node_delete_prob),
            ("weight_mutate_rate", self.weight_mutate_rate),
            ("weight_replace_rate", self.weight_replace_rate),
        ]
    }
}

/// Returns a mutated copy of `genome`.
///
/// Structural mutations are tried first, each independently with its own
/// probability (add node, delete node, add connection, delete connection),
/// then every weight, bias and activation is considered for a parametric
/// change. Structural proposals that would duplicate a link or close a cycle
/// are dropped.
pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    registry: &mut InnovationRegistry,
    params: &MutationParams,
    rng: &mut R,
) -> Genome {
    let mut g = genome.clone();
    g.fitness = None;

    if rng.random::<f64>() < params.node_add_prob {
        add_node(&mut g, registry, params, rng);
    }
    if rng.random::<f64>() < params.node_delete_prob {
        delete_node(&mut g, rng);
    }
    if rng.random::<f64>() < params.conn_add_prob {
        add_connection(&mut g, registry, params, rng);
    }
    if rng.random::<f64>() < params.conn_delete_prob && !g.connections.is_empty() {
        let idx = rng.random_range(0..g.connections.len());
        g.connections.remove(idx);
    }

    let limit = params.value_limit;
    for conn in &mut g.connections {
        conn.weight = mutate_value(
            conn.weight,
            params.weight_mutate_rate,
            params.weight_mutate_power,
            params.weight_replace_rate,
            params.init_range,
            limit,
            rng,
        );
    }
    for node in g.nodes.iter_mut().filter(|n| n.kind != NodeKind::Input) {
        node.bias = mutate_value(
            node.bias,
            params.bias_mutate_rate,
            params.bias_mutate_power,
            params.bias_replace_rate,
            params.init_range,
            limit,
            rng,
        );
        if rng.random::<f64>() < params.activation_mutate_rate && !params.activation_options.is_empty() {
            let pick = rng.random_range(0..params.activation_options.len());
            node.activation = Some(params.activation_options[pick]);
        }
    }
    g
}

fn mutate_value<R: Rng + ?Sized>(
    value: f64,
    mutate_rate: f64,
    power: f64,
    replace_rate: f64,
    init_range: f64,
    limit: f64,
    rng: &mut R,
) -> f64 {
    let r = rng.random::<f64>();
    let next = if r < mutate_rate {
        let noise = Normal::new(0.0, power).map(|n| n.sample(rng)).unwrap_or(0.0);
        value + noise
    } else if r < mutate_rate + replace_rate {
        rng.random_range(-init_range..=init_range)
    } else {
        return value;
    };
    next.clamp(-limit, limit)
}

/// Splits a random enabled connection `a → b` into `a → new → b`. The old
/// link is disabled, the incoming link gets weight 1 and the outgoing link
/// keeps the old weight, so the network function is initially close to
/// unchanged.
fn add_node<R: Rng + ?Sized>(
    g: &mut Genome,
    registry: &mut InnovationRegistry,
    params: &MutationParams,
    rng: &mut R,
) {
    let enabled: Vec<usize> = (0..g.connections.len()).filter(|&i| g.connections[i].enabled).collect();
    if enabled.is_empty() {
        return;
    }
    let idx = enabled[rng.random_range(0..enabled.len())];
    let (source, target, weight) = {
        let c = &mut g.connections[idx];
        c.enabled = false;
        (c.source, c.target, c.weight)
    };
    let node = registry.split_node(source, target, g);
    g.insert_node(NodeGene::new(node, NodeKind::Hidden, params.activation_default, 0.0));
    g.insert_connection(ConnectionGene {
        innovation: registry.connection(source, node),
        source,
        target: node,
        weight: 1.0,
        enabled: true,
    });
    g.insert_connection(ConnectionGene {
        innovation: registry.connection(node, target),
        source: node,
        target,
        weight,
        enabled: true,
    });
}

fn delete_node<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) {
    let hidden: Vec<_> = g.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).map(|n| n.id).collect();
    if hidden.is_empty() {
        return;
    }
    let victim = hidden[rng.random_range(0..hidden.len())];
    g.nodes.retain(|n| n.id != victim);
    g.connections.retain(|c| c.source != victim && c.target != victim);
}

fn add_connection<R: Rng + ?Sized>(
    g: &mut Genome,
    registry: &mut InnovationRegistry,
    params: &MutationParams,
    rng: &mut R,
) {
    let targets: Vec<_> = g.nodes.iter().filter(|n| n.kind != NodeKind::Input).map(|n| (n.id, n.kind)).collect();
    if targets.is_empty() {
        return;
    }
    let source = &g.nodes[rng.random_range(0..g.nodes.len())];
    let (source_id, source_kind) = (source.id, source.kind);
    let (target_id, target_kind) = targets[rng.random_range(0..targets.len())];

    if source_kind == NodeKind::Output && target_kind == NodeKind::Output {
        return;
    }
    if g.has_connection(source_id, target_id) || g.creates_cycle(source_id, target_id) {
        return;
    }
    g.insert_connection(ConnectionGene {
        innovation: registry.connection(source_id, target_id),
        source: source_id,
        target: target_id,
        weight: rng.random_range(-params.init_range..=params.init_range),
        enabled: true,
    });
}
