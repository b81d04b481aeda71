use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::{Error, Result};

/// Node identifier, unique within a genome and consistent across a
/// population through the [`InnovationRegistry`](super::InnovationRegistry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: NodeId,
    pub kind: NodeKind,
    /// `None` for input nodes, which pass their value through.
    pub activation: Option<Activation>,
    pub bias: f64,
}

impl NodeGene {
    pub fn input(id: NodeId) -> Self {
        Self { id, kind: NodeKind::Input, activation: None, bias: 0.0 }
    }

    pub fn new(id: NodeId, kind: NodeKind, activation: Activation, bias: f64) -> Self {
        debug_assert!(kind != NodeKind::Input);
        Self { id, kind, activation: Some(activation), bias }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub innovation: u64,
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// A feedforward NEAT genome.
///
/// Nodes are kept sorted by id and connections by innovation number. Input
/// nodes occupy ids `0..input_count` and outputs the following
/// `output_count` ids; hidden ids are handed out by the innovation registry.
///
/// The graph over *all* connections, enabled or not, is kept acyclic. That is
/// stricter than acyclicity of the enabled subgraph and means that re-enabling
/// a gene during crossover can never close a loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub input_count: usize,
    pub output_count: usize,
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    #[serde(default)]
    pub fitness: Option<f64>,
}

/// Innovation number of the initial input→output link in a minimal genome.
pub fn minimal_innovation(input: usize, output: usize, output_count: usize) -> u64 {
    (input * output_count + output) as u64
}

/// Fully connected input→output genome with uniform weights in `[-1, 1]`.
/// Output nodes start with the `tanh` activation and zero bias.
pub fn new_minimal_genome<R: Rng + ?Sized>(
    input_count: usize,
    output_count: usize,
    rng: &mut R,
) -> Result<Genome> {
    if input_count == 0 || output_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "genome needs at least one input and one output (got {input_count}, {output_count})"
        )));
    }
    let mut nodes = Vec::with_capacity(input_count + output_count);
    nodes.extend((0..input_count).map(|i| NodeGene::input(NodeId(i as u32))));
    nodes.extend((0..output_count).map(|o| {
        NodeGene::new(NodeId((input_count + o) as u32), NodeKind::Output, Activation::Tanh, 0.0)
    }));

    let mut connections = Vec::with_capacity(input_count * output_count);
    for i in 0..input_count {
        for o in 0..output_count {
            connections.push(ConnectionGene {
                innovation: minimal_innovation(i, o, output_count),
                source: NodeId(i as u32),
                target: NodeId((input_count + o) as u32),
                weight: rng.random_range(-1.0..=1.0),
                enabled: true,
            });
        }
    }
    Ok(Genome { input_count, output_count, nodes, connections, fitness: None })
}

impl Genome {
    pub fn input_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.input_count as u32).map(NodeId)
    }

    pub fn output_ids(&self) -> impl Iterator<Item = NodeId> {
        let start = self.input_count as u32;
        (start..start + self.output_count as u32).map(NodeId)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    pub fn has_connection(&self, source: NodeId, target: NodeId) -> bool {
        self.connections.iter().any(|c| c.source == source && c.target == target)
    }

    /// Number of genes, used to break fitness ties between parents.
    pub fn size(&self) -> usize {
        self.nodes.len() + self.connections.len()
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    pub fn enabled_connections(&self) -> impl Iterator<Item = &ConnectionGene> {
        self.connections.iter().filter(|c| c.enabled)
    }

    /// True if adding `source → target` would close a directed cycle, i.e.
    /// `source` is reachable from `target` over existing connections.
    pub fn creates_cycle(&self, source: NodeId, target: NodeId) -> bool {
        if source == target {
            return true;
        }
        let mut adjacency: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for c in &self.connections {
            adjacency.entry(c.source).or_default().push(c.target);
        }
        let mut stack = vec![target];
        let mut seen = HashSet::new();
        while let Some(node) = stack.pop() {
            if node == source {
                return true;
            }
            if !seen.insert(node) {
                continue;
            }
            if let Some(next) = adjacency.get(&node) {
                stack.extend(next.iter().copied());
            }
        }
        false
    }

    /// Kahn topological sort over the connections selected by `include`.
    /// Ties are broken by ascending node id so the order is deterministic.
    pub(crate) fn topological_order(
        &self,
        include: impl Fn(&ConnectionGene) -> bool,
    ) -> Option<Vec<NodeId>> {
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        let mut outgoing: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for c in self.connections.iter().filter(|c| include(c)) {
            *indegree.get_mut(&c.target)? += 1;
            outgoing.entry(c.source).or_default().push(c.target);
        }
        let mut ready: std::collections::BTreeSet<NodeId> =
            indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            if let Some(targets) = outgoing.get(&id) {
                for t in targets {
                    let d = indegree.get_mut(t)?;
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(*t);
                    }
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Acyclicity of the graph over every connection, enabled or not.
    pub fn is_acyclic(&self) -> bool {
        self.topological_order(|_| true).is_some()
    }

    /// Checks every structural invariant of the genome.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !self.nodes.windows(2).all(|w| w[0].id < w[1].id) {
            return bad("node ids must be unique and sorted".into());
        }
        if !self.connections.windows(2).all(|w| w[0].innovation < w[1].innovation) {
            return bad("innovation numbers must be unique and sorted".into());
        }
        for id in self.input_ids() {
            match self.node(id) {
                Some(n) if n.kind == NodeKind::Input && n.activation.is_none() && n.bias == 0.0 => {}
                _ => return bad(format!("{id} must be a pass-through input node")),
            }
        }
        for id in self.output_ids() {
            match self.node(id) {
                Some(n) if n.kind == NodeKind::Output && n.activation.is_some() => {}
                _ => return bad(format!("{id} must be an output node")),
            }
        }
        let mut pairs = HashSet::new();
        for c in &self.connections {
            let (Some(_), Some(t)) = (self.node(c.source), self.node(c.target)) else {
                return bad(format!("connection {} references a missing node", c.innovation));
            };
            if t.kind == NodeKind::Input {
                return bad(format!("connection {} targets an input", c.innovation));
            }
            if !pairs.insert((c.source, c.target)) {
                return bad(format!("duplicate connection {} -> {}", c.source, c.target));
            }
            if !c.weight.is_finite() {
                return bad(format!("connection {} has a non-finite weight", c.innovation));
            }
        }
        if !self.is_acyclic() {
            return Err(Error::CycleDetected);
        }
        Ok(())
    }

    pub(crate) fn insert_node(&mut self, node: NodeGene) {
        let pos = self.nodes.partition_point(|n| n.id < node.id);
        self.nodes.insert(pos, node);
    }

    pub(crate) fn insert_connection(&mut self, conn: ConnectionGene) {
        let pos = self.connections.partition_point(|c| c.innovation < conn.innovation);
        self.connections.insert(pos, conn);
    }
}
