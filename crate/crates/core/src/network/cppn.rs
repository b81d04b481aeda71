use std::collections::HashMap;

use crate::neat::{Activation, Genome, NodeKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Slot {
    activation: Option<Activation>,
    bias: f64,
    /// `(source slot, weight)` for every enabled incoming connection.
    incoming: Vec<(usize, f64)>,
}

/// A genome flattened into a topologically ordered evaluation plan.
///
/// Every node gets a slot, so a minimal `(7, 1)` genome has 8 slots. Inputs
/// occupy the first slots, in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCppn {
    slots: Vec<Slot>,
    input_count: usize,
    outputs: Vec<usize>,
}

impl CompiledCppn {
    pub fn compile(genome: &Genome) -> Result<Self> {
        let order = genome.topological_order(|c| c.enabled).ok_or(Error::CycleDetected)?;
        // inputs have no incoming links and the lowest ids, so they lead the order
        debug_assert!(order.iter().take(genome.input_count).enumerate().all(|(i, id)| id.0 as usize == i));
        let position: HashMap<_, _> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut slots: Vec<Slot> = order
            .iter()
            .map(|&id| {
                let node = genome.node(id).expect("ordered ids come from the genome");
                Slot {
                    activation: if node.kind == NodeKind::Input { None } else { node.activation },
                    bias: node.bias,
                    incoming: Vec::new(),
                }
            })
            .collect();
        for c in genome.enabled_connections() {
            slots[position[&c.target]].incoming.push((position[&c.source], c.weight));
        }
        let outputs = genome.output_ids().map(|id| position[&id]).collect();
        Ok(Self { slots, input_count: genome.input_count, outputs })
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn connection_count(&self) -> usize {
        self.slots.iter().map(|s| s.incoming.len()).sum()
    }

    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.outputs.len()];
        let mut scratch = Vec::with_capacity(self.slots.len());
        self.activate_into(inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Allocation-free evaluation for hot loops; `scratch` is reused.
    pub fn activate_into(&self, inputs: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        if inputs.len() != self.input_count {
            return Err(Error::LengthMismatch { expected: self.input_count, got: inputs.len() });
        }
        if out.len() != self.outputs.len() {
            return Err(Error::LengthMismatch { expected: self.outputs.len(), got: out.len() });
        }
        scratch.clear();
        scratch.extend_from_slice(inputs);
        for slot in &self.slots[self.input_count..] {
            let sum = slot.incoming.iter().fold(slot.bias, |acc, &(src, w)| acc + w * scratch[src]);
            let value = slot.activation.map_or(sum, |a| a.apply(sum));
            scratch.push(value);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot];
        }
        Ok(())
    }
}
