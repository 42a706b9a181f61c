//! Named parameter storage and the momentum SGD optimizer.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Gradients, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Array2<f64>) -> ParamId {
        assert!(!self.names.iter().any(|n| n == name), "duplicate parameter {name}");
        self.names.push(name.to_string());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    /// Uniform Glorot initialisation.
    pub fn add_glorot(&mut self, name: &str, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ParamId {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let v = Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-bound..bound));
        self.add(name, v)
    }

    pub fn add_zeros(&mut self, name: &str, rows: usize, cols: usize) -> ParamId {
        self.add(name, Array2::zeros((rows, cols)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn value(&self, id: ParamId) -> &Array2<f64> {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.values[id.0]
    }

    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    /// Zero gradients shaped like every parameter.
    pub fn zeros_like(&self) -> Vec<Array2<f64>> {
        self.values.iter().map(|v| Array2::zeros(v.dim())).collect()
    }

    /// Parameter gradients from a reverse pass, zeros for unused parameters.
    pub fn gradients(&self, tape: &Tape, grads: &Gradients) -> Vec<Array2<f64>> {
        let mut out = self.zeros_like();
        for (p, v) in tape.param_vars() {
            if let Some(g) = grads.get(v) {
                out[p.0] += g;
            }
        }
        out
    }
}

pub fn global_norm(grads: &[Array2<f64>]) -> f64 {
    grads.iter().map(|g| g.iter().map(|x| x * x).sum::<f64>()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Global gradient-norm cap.
    pub clip_norm: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { learning_rate: 0.05, momentum: 0.9, clip_norm: 5.0 }
    }
}

/// Gradient descent with heavy-ball momentum and global-norm clipping.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub config: SgdConfig,
    velocity: Vec<Array2<f64>>,
}

impl Sgd {
    pub fn new(config: SgdConfig, params: &ParamStore) -> Self {
        Sgd { config, velocity: params.zeros_like() }
    }

    /// Applies one descent step on `grads` (gradients of a loss to minimise).
    /// Returns the gradient norm before clipping.
    pub fn step(&mut self, params: &mut ParamStore, grads: &[Array2<f64>]) -> f64 {
        let norm = global_norm(grads);
        let scale = if norm > self.config.clip_norm && norm > 0.0 { self.config.clip_norm / norm } else { 1.0 };
        for ((v, g), id) in self.velocity.iter_mut().zip(grads).zip(0..) {
            v.zip_mut_with(g, |v, &g| *v = self.config.momentum * *v + scale * g);
            params.value_mut(ParamId(id)).scaled_add(-self.config.learning_rate, v);
        }
        norm
    }
}
