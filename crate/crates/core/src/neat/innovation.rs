use std::collections::HashMap;

use super::genome::minimal_innovation;
use super::{Genome, NodeId};

/// Historical markings shared by one NEAT population.
///
/// Connections are keyed by their `(source, target)` endpoints, so the same
/// structural addition made in two different genomes receives one innovation
/// number. Node splits are keyed the same way and reuse the hidden node id.
/// The mapping is never reset, which makes it consistent across generations
/// as well as within one.
#[derive(Debug, Clone)]
pub struct InnovationRegistry {
    connections: HashMap<(NodeId, NodeId), u64>,
    splits: HashMap<(NodeId, NodeId), NodeId>,
    next_innovation: u64,
    next_node: u32,
}

impl InnovationRegistry {
    /// Registry pre-seeded with the links of a minimal genome of this shape.
    pub fn new(input_count: usize, output_count: usize) -> Self {
        let mut connections = HashMap::new();
        for i in 0..input_count {
            for o in 0..output_count {
                connections.insert(
                    (NodeId(i as u32), NodeId((input_count + o) as u32)),
                    minimal_innovation(i, o, output_count),
                );
            }
        }
        Self {
            connections,
            splits: HashMap::new(),
            next_innovation: (input_count * output_count) as u64,
            next_node: (input_count + output_count) as u32,
        }
    }

    pub fn connection(&mut self, source: NodeId, target: NodeId) -> u64 {
        *self.connections.entry((source, target)).or_insert_with(|| {
            let id = self.next_innovation;
            self.next_innovation += 1;
            id
        })
    }

    /// Hidden node id for splitting `source → target`.
    ///
    /// Reuses the id recorded for the same split elsewhere unless `genome`
    /// already holds that node (the link was split, deleted and re-added),
    /// in which case a fresh id is issued.
    pub fn split_node(&mut self, source: NodeId, target: NodeId, genome: &Genome) -> NodeId {
        if let Some(&id) = self.splits.get(&(source, target)) {
            if !genome.has_node(id) {
                return id;
            }
            return self.fresh_node();
        }
        let id = self.fresh_node();
        self.splits.insert((source, target), id);
        id
    }

    fn fresh_node(&mut self) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        id
    }

    pub fn innovation_count(&self) -> u64 {
        self.next_innovation
    }
}
