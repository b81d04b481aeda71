use serde::{Deserialize, Serialize};

use super::Controller;
use crate::{Error, Result};

/// Dense feedforward network with `tanh` on every non-input layer.
///
/// `weights[k]` is the row-major `layers[k + 1] × layers[k]` matrix between
/// layer `k` and layer `k + 1`; `biases[k]` holds the biases of layer `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredNetwork {
    layers: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl LayeredNetwork {
    /// All weights and biases zero.
    pub fn zeros(layers: &[usize]) -> Result<Self> {
        if layers.len() < 2 || layers.contains(&0) {
            return Err(Error::InvalidArgument(format!("bad layer sizes {layers:?}")));
        }
        let weights = layers.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = layers[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self { layers: layers.to_vec(), weights, biases })
    }

    pub fn from_weights(layers: &[usize], weights: Vec<Vec<f64>>) -> Result<Self> {
        let mut net = Self::zeros(layers)?;
        if weights.len() != net.weights.len() {
            return Err(Error::LengthMismatch { expected: net.weights.len(), got: weights.len() });
        }
        for (have, want) in weights.iter().zip(&net.weights) {
            if have.len() != want.len() {
                return Err(Error::LengthMismatch { expected: want.len(), got: have.len() });
            }
            if have.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidArgument("non-finite weight".into()));
            }
        }
        net.weights = weights;
        Ok(net)
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight(&self, layer: usize, to: usize, from: usize) -> f64 {
        self.weights[layer][to * self.layers[layer] + from]
    }

    pub fn set_weight(&mut self, layer: usize, to: usize, from: usize, value: f64) {
        let width = self.layers[layer];
        self.weights[layer][to * width + from] = value;
    }

    pub fn connection_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layers.last().expect("at least two layers")
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().flatten().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        if inputs.len() != self.layers[0] {
            return Err(Error::LengthMismatch { expected: self.layers[0], got: inputs.len() });
        }
        let mut current = inputs.to_vec();
        for (k, (matrix, bias)) in self.weights.iter().zip(&self.biases).enumerate() {
            let width = self.layers[k];
            current = matrix
                .chunks_exact(width)
                .zip(bias)
                .map(|(row, b)| {
                    let sum = row.iter().zip(&current).fold(*b, |acc, (w, x)| acc + w * x);
                    sum.tanh()
                })
                .collect();
        }
        Ok(current)
    }
}

impl Controller for LayeredNetwork {
    fn input_count(&self) -> usize {
        self.input_size()
    }

    fn output_count(&self) -> usize {
        self.output_size()
    }

    fn act(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.activate(observation)
    }
}
