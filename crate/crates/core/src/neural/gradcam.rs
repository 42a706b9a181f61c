//! Gradient-weighted class activation maps over graph-model layers.

use serde::Serialize;

use super::graph_model::{GraphInput, GraphModel};
use super::tape::{Mat, Tape};
use super::NeuralError;
use crate::chem::MolecularGraph;

/// Normalised score above which an atom is tagged.
pub const TAG_CUTOFF: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributionMap {
    /// Layer-averaged heat per atom.
    pub raw: Vec<f64>,
    /// `raw` divided by its maximum; all zeros when the maximum is 0.
    pub normalized: Vec<f64>,
    /// Atoms with normalised score above [`TAG_CUTOFF`], ascending.
    pub tagged: Vec<usize>,
}

impl AttributionMap {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let max = raw.iter().fold(0.0f64, |m, &x| m.max(x));
        let normalized: Vec<f64> = if max > 0.0 { raw.iter().map(|x| x / max).collect() } else { vec![0.0; raw.len()] };
        let tagged = (0..raw.len()).filter(|&i| normalized[i] > TAG_CUTOFF).collect();
        AttributionMap { raw, normalized, tagged }
    }
}

/// Per-layer activations and gradients of the class score with respect to them.
pub struct LayerGradients {
    pub activations: Vec<Mat>,
    pub gradients: Vec<Mat>,
    pub score: f64,
}

pub fn layer_gradients(model: &GraphModel, input: &GraphInput, class: usize) -> Result<LayerGradients, NeuralError> {
    let mut tape = Tape::new();
    let fwd = model.forward(&mut tape, input, None);
    let y = model.class_score(&mut tape, &fwd, class)?;
    let grads = tape.backward(y);
    let activations: Vec<Mat> = fwd.layers.iter().map(|&v| tape.value(v).clone()).collect();
    let gradients = fwd.layers.iter().map(|&v| grads.get_or_zeros(v, tape.value(v).dim())).collect();
    Ok(LayerGradients { activations, gradients, score: tape.scalar(y) })
}

/// Class score with the output of layer `layer` replaced by `value`.
pub fn class_score_with_layer(
    model: &GraphModel,
    input: &GraphInput,
    class: usize,
    layer: usize,
    value: &Mat,
) -> Result<f64, NeuralError> {
    let mut tape = Tape::new();
    let fwd = model.forward(&mut tape, input, Some((layer, value)));
    let y = model.class_score(&mut tape, &fwd, class)?;
    Ok(tape.scalar(y))
}

/// Heat from activations and gradients: per layer, channel weights are the
/// node-mean of the gradient, node heat is the ReLU of the weighted channel
/// sum, and layers are averaged.
pub fn heat_from_layers(activations: &[Mat], gradients: &[Mat]) -> Vec<f64> {
    let n = activations.first().map_or(0, |a| a.nrows());
    let mut heat = vec![0.0; n];
    for (f, g) in activations.iter().zip(gradients) {
        let alpha: Vec<f64> = (0..g.ncols()).map(|k| g.column(k).sum() / n as f64).collect();
        for (node, h) in heat.iter_mut().enumerate() {
            let s: f64 = (0..f.ncols()).map(|k| alpha[k] * f[[node, k]]).sum();
            *h += s.max(0.0);
        }
    }
    let layers = activations.len().max(1) as f64;
    heat.iter().map(|h| h / layers).collect()
}

pub fn gradcam(model: &GraphModel, m: &MolecularGraph, class: usize) -> Result<AttributionMap, NeuralError> {
    let input = GraphInput::new(m)?;
    let lg = layer_gradients(model, &input, class)?;
    Ok(AttributionMap::from_raw(heat_from_layers(&lg.activations, &lg.gradients)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_node_single_layer_by_hand() {
        let f = array![[2.0, -1.0, 0.5]];
        let g = array![[0.3, 0.4, -2.0]];
        // alpha = g (one node); sum = 0.6 - 0.4 - 1.0 = -0.8 -> ReLU 0.
        assert_eq!(heat_from_layers(&[f.clone()], &[g]), vec![0.0]);
        let g2 = array![[1.0, 0.5, 2.0]];
        // 2.0 - 0.5 + 1.0 = 2.5
        assert_eq!(heat_from_layers(&[f], &[g2]), vec![2.5]);
    }

    #[test]
    fn normalisation_and_tagging() {
        let a = AttributionMap::from_raw(vec![0.0, 1.0, 4.0, 1.2, 1.3]);
        assert_eq!(a.normalized, vec![0.0, 0.25, 1.0, 0.3, 0.325]);
        assert_eq!(a.tagged, vec![2, 4]);
        let z = AttributionMap::from_raw(vec![0.0, 0.0]);
        assert!(z.tagged.is_empty());
    }
}
