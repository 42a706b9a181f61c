//! Message-passing graph networks with binary, multiclass or regression heads.

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, load_params, params_to_tensors, save_checkpoint, CheckpointManifest};
use super::params::{ParamId, ParamStore, Sgd, SgdConfig};
use super::tape::{Mat, Tape, Var};
use super::NeuralError;
use crate::chem::{Element, MolecularGraph};
use crate::io::config_hash;
use crate::scorers::MoleculePredictor;

const ELEMENTS: [Element; 11] = [
    Element::C,
    Element::N,
    Element::O,
    Element::F,
    Element::P,
    Element::S,
    Element::CL,
    Element::BR,
    Element::I,
    Element::B,
    Element::SI,
];

/// Element one-hot (11 + other), degree one-hot (0-5), formal charge,
/// aromatic flag, ring flag, hydrogen count one-hot (0-3+).
pub const NODE_FEATURES: usize = 12 + 6 + 3 + 4;

pub fn node_features(m: &MolecularGraph) -> Mat {
    let mut x = Mat::zeros((m.atom_count(), NODE_FEATURES));
    for (i, a) in m.atoms().iter().enumerate() {
        let e = ELEMENTS.iter().position(|&e| e == a.element).unwrap_or(ELEMENTS.len());
        x[[i, e]] = 1.0;
        x[[i, 12 + m.degree(i).min(5)]] = 1.0;
        x[[i, 18]] = f64::from(a.formal_charge);
        x[[i, 19]] = f64::from(u8::from(a.is_aromatic));
        x[[i, 20]] = f64::from(u8::from(a.in_ring));
        x[[i, 21 + usize::from(a.hydrogens.min(3))]] = 1.0;
    }
    x
}

/// Precomputed per-molecule inputs: node features, symmetric-normalised
/// adjacency with self loops, and the attention neighbourhood mask.
#[derive(Debug, Clone)]
pub struct GraphInput {
    pub features: Mat,
    pub adjacency: Mat,
    pub mask: Vec<bool>,
}

impl GraphInput {
    pub fn new(m: &MolecularGraph) -> Result<Self, NeuralError> {
        let n = m.atom_count();
        if n == 0 {
            return Err(NeuralError::InvalidMolecule("molecule has no atoms".into()));
        }
        let mut a = Mat::eye(n);
        for b in m.bonds() {
            a[[b.begin, b.end]] = 1.0;
            a[[b.end, b.begin]] = 1.0;
        }
        let mask = a.iter().map(|&v| v > 0.0).collect();
        let d: Vec<f64> = a.rows().into_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
        let adjacency = Mat::from_shape_fn((n, n), |(i, j)| a[[i, j]] * d[i] * d[j]);
        Ok(GraphInput { features: node_features(m), adjacency, mask })
    }

    pub fn nodes(&self) -> usize {
        self.features.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    /// Graph convolution.
    Gcn,
    /// Single-head additive attention.
    Attention,
    /// Convolution with initial-residual and identity mixing.
    Deep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Binary,
    Multiclass,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphArch {
    pub kind: LayerKind,
    pub layers: usize,
    pub hidden: usize,
    pub head: HeadKind,
    /// Class count for a multiclass head.
    pub classes: usize,
    /// Initial-residual weight of deep layers.
    pub alpha: f64,
    /// Identity-mapping strength of deep layers.
    pub lambda: f64,
    /// Negative slope of the attention score activation.
    pub leaky_slope: f64,
}

impl Default for GraphArch {
    fn default() -> Self {
        GraphArch {
            kind: LayerKind::Gcn,
            layers: 3,
            hidden: 64,
            head: HeadKind::Binary,
            classes: 2,
            alpha: 0.1,
            lambda: 0.5,
            leaky_slope: 0.2,
        }
    }
}

impl GraphArch {
    pub fn outputs(&self) -> usize {
        match self.head {
            HeadKind::Multiclass => self.classes,
            HeadKind::Binary | HeadKind::Regression => 1,
        }
    }

    /// Classes addressable by attribution and prediction.
    pub fn class_count(&self) -> usize {
        match self.head {
            HeadKind::Binary => 2,
            HeadKind::Multiclass => self.classes,
            HeadKind::Regression => 1,
        }
    }

    fn validate(&self) -> Result<(), NeuralError> {
        if self.layers == 0 || self.hidden == 0 {
            return Err(NeuralError::Config("graph model needs at least one layer and hidden width".into()));
        }
        if self.head == HeadKind::Multiclass && self.classes < 2 {
            return Err(NeuralError::Config("multiclass head needs at least two classes".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct LayerIds {
    w: ParamId,
    b: Option<ParamId>,
    attention: Option<(ParamId, ParamId)>,
}

#[derive(Debug, Clone)]
struct GraphIds {
    w_in: ParamId,
    b_in: ParamId,
    layers: Vec<LayerIds>,
    w_out: ParamId,
    b_out: ParamId,
}

#[derive(Debug, Clone)]
pub struct GraphModel {
    pub arch: GraphArch,
    pub params: ParamStore,
    /// Regression targets are standardised with these during training.
    pub target_mean: f64,
    pub target_std: f64,
    pub config_hash: String,
    ids: GraphIds,
}

/// Tape handles from one forward pass.
pub struct Forward {
    /// 1 x outputs head values (logits, or the standardised regression value).
    pub out: Var,
    /// Output of each message-passing layer, nodes x hidden.
    pub layers: Vec<Var>,
    pub features: Var,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Class(usize),
    Value(f64),
}

impl GraphModel {
    pub fn new(arch: GraphArch, seed: u64) -> Result<Self, NeuralError> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = arch.hidden;
        let mut p = ParamStore::new();
        let w_in = p.add_glorot("input.w", NODE_FEATURES, k, &mut rng);
        let b_in = p.add_zeros("input.b", 1, k);
        let mut layers = Vec::with_capacity(arch.layers);
        for l in 0..arch.layers {
            let w = p.add_glorot(&format!("layer{l}.w"), k, k, &mut rng);
            let ids = match arch.kind {
                LayerKind::Gcn => LayerIds { w, b: Some(p.add_zeros(&format!("layer{l}.b"), 1, k)), attention: None },
                LayerKind::Attention => {
                    let b = p.add_zeros(&format!("layer{l}.b"), 1, k);
                    let src = p.add_glorot(&format!("layer{l}.att_src"), k, 1, &mut rng);
                    let dst = p.add_glorot(&format!("layer{l}.att_dst"), k, 1, &mut rng);
                    LayerIds { w, b: Some(b), attention: Some((src, dst)) }
                }
                LayerKind::Deep => LayerIds { w, b: None, attention: None },
            };
            layers.push(ids);
        }
        let w_out = p.add_glorot("head.w", k, arch.outputs(), &mut rng);
        let b_out = p.add_zeros("head.b", 1, arch.outputs());
        Ok(GraphModel {
            arch,
            params: p,
            target_mean: 0.0,
            target_std: 1.0,
            config_hash: String::new(),
            ids: GraphIds { w_in, b_in, layers, w_out, b_out },
        })
    }

    /// Builds the forward graph. `replace` swaps the output of layer `l` for
    /// a constant, which lets callers probe the class score as a function of
    /// one layer's activations.
    pub fn forward(&self, tape: &mut Tape, input: &GraphInput, replace: Option<(usize, &Mat)>) -> Forward {
        let p = &self.params;
        let ids = &self.ids;
        let x = tape.constant(input.features.clone());
        let adj = tape.constant(input.adjacency.clone());
        let w_in = tape.param(p, ids.w_in);
        let b_in = tape.param(p, ids.b_in);
        let xw = tape.matmul(x, w_in);
        let xb = tape.add_row(xw, b_in);
        let h0 = tape.relu(xb);
        let mut h = h0;
        let mut outs = Vec::with_capacity(ids.layers.len());
        for (l, li) in ids.layers.iter().enumerate() {
            let w = tape.param(p, li.w);
            h = match self.arch.kind {
                LayerKind::Gcn => {
                    let ah = tape.matmul(adj, h);
                    let z = tape.matmul(ah, w);
                    let b = tape.param(p, li.b.expect("gcn bias"));
                    let zb = tape.add_row(z, b);
                    tape.relu(zb)
                }
                LayerKind::Attention => {
                    let (src, dst) = li.attention.expect("attention vectors");
                    let (src, dst) = (tape.param(p, src), tape.param(p, dst));
                    let wh = tape.matmul(h, w);
                    let s = tape.matmul(wh, src);
                    let d = tape.matmul(wh, dst);
                    let dt = tape.transpose(d);
                    let e = tape.outer_add(s, dt);
                    let e = tape.leaky_relu(e, self.arch.leaky_slope);
                    let att = tape.masked_softmax_rows(e, &input.mask);
                    let agg = tape.matmul(att, wh);
                    let b = tape.param(p, li.b.expect("attention bias"));
                    let zb = tape.add_row(agg, b);
                    tape.relu(zb)
                }
                LayerKind::Deep => {
                    let alpha = self.arch.alpha;
                    let beta = (self.arch.lambda / (l + 1) as f64 + 1.0).ln();
                    let ah = tape.matmul(adj, h);
                    let ah = tape.scale(ah, 1.0 - alpha);
                    let init = tape.scale(h0, alpha);
                    let support = tape.add(ah, init);
                    let sw = tape.matmul(support, w);
                    let sw = tape.scale(sw, beta);
                    let keep = tape.scale(support, 1.0 - beta);
                    let mix = tape.add(keep, sw);
                    tape.relu(mix)
                }
            };
            if let Some((rl, value)) = replace {
                if rl == l {
                    h = tape.constant(value.clone());
                }
            }
            outs.push(h);
        }
        let pooled = tape.mean_rows(h);
        let w_out = tape.param(p, ids.w_out);
        let b_out = tape.param(p, ids.b_out);
        let o = tape.matmul(pooled, w_out);
        let out = tape.add_row(o, b_out);
        Forward { out, layers: outs, features: x }
    }

    /// Scalar class score y^c: the logit for binary class 1 (negated for
    /// class 0), the class logit for multiclass, the value for regression.
    pub fn class_score(&self, tape: &mut Tape, fwd: &Forward, class: usize) -> Result<Var, NeuralError> {
        let count = self.arch.class_count();
        if class >= count {
            return Err(NeuralError::ClassOutOfRange { class, classes: count });
        }
        Ok(match self.arch.head {
            HeadKind::Binary if class == 0 => tape.scale(fwd.out, -1.0),
            HeadKind::Binary | HeadKind::Regression => fwd.out,
            HeadKind::Multiclass => tape.slice_cols(fwd.out, class, class + 1),
        })
    }

    fn loss(&self, tape: &mut Tape, fwd: &Forward, label: Label) -> Result<Var, NeuralError> {
        match (self.arch.head, label) {
            (HeadKind::Binary, Label::Class(c)) if c < 2 => {
                let zero = tape.constant(Mat::zeros((1, 1)));
                let both = tape.concat_cols(&[zero, fwd.out]);
                let lsm = tape.log_softmax_rows(both);
                let picked = tape.pick_cols(lsm, &[c]);
                Ok(tape.scale(picked, -1.0))
            }
            (HeadKind::Multiclass, Label::Class(c)) if c < self.arch.classes => {
                let lsm = tape.log_softmax_rows(fwd.out);
                let picked = tape.pick_cols(lsm, &[c]);
                Ok(tape.scale(picked, -1.0))
            }
            (HeadKind::Regression, Label::Value(y)) => {
                let t = tape.constant(Mat::from_elem((1, 1), (y - self.target_mean) / self.target_std));
                let d = tape.sub(fwd.out, t);
                Ok(tape.mul(d, d))
            }
            (head, label) => Err(NeuralError::LabelMismatch(format!("{label:?} does not fit a {head:?} head"))),
        }
    }

    /// Loss on one molecule and its parameter gradients.
    pub fn loss_gradient(&self, input: &GraphInput, label: Label) -> Result<(f64, Vec<Array2<f64>>), NeuralError> {
        let mut tape = Tape::new();
        let fwd = self.forward(&mut tape, input, None);
        let loss = self.loss(&mut tape, &fwd, label)?;
        let grads = tape.backward(loss);
        Ok((tape.scalar(loss), self.params.gradients(&tape, &grads)))
    }

    pub fn loss_value(&self, input: &GraphInput, label: Label) -> Result<f64, NeuralError> {
        let mut tape = Tape::new();
        let fwd = self.forward(&mut tape, input, None);
        let loss = self.loss(&mut tape, &fwd, label)?;
        Ok(tape.scalar(loss))
    }

    /// Class probabilities, or the single regression value.
    pub fn predict_input(&self, input: &GraphInput) -> Vec<f64> {
        let mut tape = Tape::new();
        let fwd = self.forward(&mut tape, input, None);
        let out = tape.value(fwd.out).row(0).to_vec();
        match self.arch.head {
            HeadKind::Binary => {
                let p = 1.0 / (1.0 + (-out[0]).exp());
                vec![1.0 - p, p]
            }
            HeadKind::Multiclass => {
                let m = out.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
                let e: Vec<f64> = out.iter().map(|&x| (x - m).exp()).collect();
                let z: f64 = e.iter().sum();
                e.into_iter().map(|x| x / z).collect()
            }
            HeadKind::Regression => vec![out[0] * self.target_std + self.target_mean],
        }
    }

    pub fn predict(&self, m: &MolecularGraph) -> Result<Vec<f64>, NeuralError> {
        Ok(self.predict_input(&GraphInput::new(m)?))
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        let config = serde_json::json!({
            "arch": self.arch,
            "target_mean": self.target_mean,
            "target_std": self.target_std,
        });
        let manifest = CheckpointManifest {
            format_version: super::checkpoint::FORMAT_VERSION,
            model: "graph".into(),
            config_hash: self.config_hash.clone(),
            vocabulary: Vec::new(),
            config,
        };
        save_checkpoint(path, &params_to_tensors(&self.params), &manifest)
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let (tensors, manifest) = load_checkpoint(path)?;
        if manifest.model != "graph" {
            return Err(NeuralError::Checkpoint(format!("expected a graph checkpoint, found '{}'", manifest.model)));
        }
        #[derive(Deserialize)]
        struct Stored {
            arch: GraphArch,
            target_mean: f64,
            target_std: f64,
        }
        let s: Stored = serde_json::from_value(manifest.config).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        let mut m = GraphModel::new(s.arch, 0)?;
        load_params(&mut m.params, &tensors)?;
        m.target_mean = s.target_mean;
        m.target_std = s.target_std;
        m.config_hash = manifest.config_hash;
        Ok(m)
    }
}

/// Scorer adapter returning one class probability (or the regression value).
pub struct GraphPredictor {
    pub model: Arc<GraphModel>,
    pub class: usize,
}

impl MoleculePredictor for GraphPredictor {
    fn predict(&self, m: &MolecularGraph) -> f64 {
        match self.model.predict(m) {
            Ok(v) => v.get(self.class).copied().unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphTrainConfig {
    pub arch: GraphArch,
    pub sgd: SgdConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for GraphTrainConfig {
    fn default() -> Self {
        GraphTrainConfig {
            arch: GraphArch::default(),
            sgd: SgdConfig { learning_rate: 0.05, momentum: 0.9, clip_norm: 5.0 },
            epochs: 30,
            batch_size: 16,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    pub holdout_loss: Option<f64>,
    /// Accuracy for classifiers, R² for regressors.
    pub holdout_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphTrainReport {
    pub epochs: Vec<GraphEpoch>,
    pub train_size: usize,
    pub holdout_size: usize,
}

/// Accuracy (classification) or R² (regression) of `model` on `data`.
pub fn holdout_metric(model: &GraphModel, data: &[(GraphInput, Label)]) -> f64 {
    match model.arch.head {
        HeadKind::Regression => {
            let ys: Vec<f64> = data
                .iter()
                .map(|(_, l)| match l {
                    Label::Value(v) => *v,
                    Label::Class(c) => *c as f64,
                })
                .collect();
            let preds: Vec<f64> = data.iter().map(|(g, _)| model.predict_input(g)[0]).collect();
            r_squared(&ys, &preds)
        }
        _ => {
            let hits = data
                .iter()
                .filter(|(g, l)| {
                    let p = model.predict_input(g);
                    let best = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap_or(0);
                    *l == Label::Class(best)
                })
                .count();
            hits as f64 / data.len().max(1) as f64
        }
    }
}

pub fn r_squared(ys: &[f64], preds: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(preds).map(|(y, p)| (y - p).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

fn check_label(arch: &GraphArch, label: Label) -> Result<(), NeuralError> {
    let ok = match (arch.head, label) {
        (HeadKind::Binary, Label::Class(c)) => c < 2,
        (HeadKind::Multiclass, Label::Class(c)) => c < arch.classes,
        (HeadKind::Regression, Label::Value(v)) => v.is_finite(),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(NeuralError::LabelMismatch(format!("{label:?} does not fit a {:?} head", arch.head)))
    }
}

/// Trains a graph model on labelled molecules with minibatch SGD.
pub fn train_graph_classifier(
    data: &[(MolecularGraph, Label)],
    config: &GraphTrainConfig,
) -> Result<(GraphModel, GraphTrainReport), NeuralError> {
    if data.is_empty() {
        return Err(NeuralError::EmptyCorpus);
    }
    let mut model = GraphModel::new(config.arch, config.seed)?;
    model.config_hash = config_hash(config);
    let mut items = Vec::with_capacity(data.len());
    for (m, l) in data {
        check_label(&config.arch, *l)?;
        items.push((GraphInput::new(m)?, *l));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0002);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut rng);
    let n_hold = if items.len() > 1 { ((items.len() as f64) * config.holdout_fraction).round() as usize } else { 0 };
    let n_hold = n_hold.min(items.len() - 1);
    let (hold_idx, train_idx) = order.split_at(n_hold);
    let mut train_idx = train_idx.to_vec();
    let holdout: Vec<(GraphInput, Label)> = hold_idx.iter().map(|&i| items[i].clone()).collect();

    if config.arch.head == HeadKind::Regression {
        let ys: Vec<f64> = train_idx
            .iter()
            .map(|&i| match items[i].1 {
                Label::Value(v) => v,
                Label::Class(_) => unreachable!("checked above"),
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64;
        model.target_mean = mean;
        model.target_std = if var > 1e-12 { var.sqrt() } else { 1.0 };
    }

    let mut opt = Sgd::new(config.sgd, &model.params);
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in train_idx.chunks(config.batch_size.max(1)) {
            let results = batch
                .par_iter()
                .map(|&i| model.loss_gradient(&items[i].0, items[i].1))
                .collect::<Result<Vec<_>, _>>()?;
            let mut grads = model.params.zeros_like();
            let scale = 1.0 / batch.len() as f64;
            for (loss, g) in results {
                loss_sum += loss;
                for (acc, gi) in grads.iter_mut().zip(&g) {
                    acc.scaled_add(scale, gi);
                }
            }
            opt.step(&mut model.params, &grads);
        }
        let (holdout_loss, holdout_metric) = if holdout.is_empty() {
            (None, None)
        } else {
            let l = holdout.iter().map(|(g, l)| model.loss_value(g, *l)).collect::<Result<Vec<_>, _>>()?;
            (Some(l.iter().sum::<f64>() / l.len() as f64), Some(holdout_metric(&model, &holdout)))
        };
        let stats =
            GraphEpoch { epoch: epoch + 1, train_loss: loss_sum / train_idx.len() as f64, holdout_loss, holdout_metric };
        log::info!("graph epoch {} loss {:.4} holdout {:?}", stats.epoch, stats.train_loss, stats.holdout_metric);
        epochs.push(stats);
    }
    let report = GraphTrainReport { epochs, train_size: train_idx.len(), holdout_size: holdout.len() };
    Ok((model, report))
}

/// Indices of a class-balanced subsample: every minority-class item and an
/// equal-sized seeded sample of the majority class, in input order.
pub fn balanced_subsample(labels: &[usize], seed: u64) -> Result<Vec<usize>, NeuralError> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(NeuralError::MissingClass(if pos.is_empty() { "positive" } else { "negative" }.into()));
    }
    if pos.len() + neg.len() != labels.len() {
        return Err(NeuralError::LabelMismatch("balanced retraining needs binary labels".into()));
    }
    let k = pos.len().min(neg.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0003);
    let mut pick = |mut v: Vec<usize>| {
        v.shuffle(&mut rng);
        v.truncate(k);
        v
    };
    let mut out = pick(pos);
    out.extend(pick(neg));
    out.sort_unstable();
    Ok(out)
}

/// Retrains a binary classifier on a class-balanced subsample of `data`.
pub fn retrain_balanced(
    data: &[(MolecularGraph, Label)],
    config: &GraphTrainConfig,
) -> Result<(GraphModel, GraphTrainReport), NeuralError> {
    let labels = data
        .iter()
        .map(|(_, l)| match l {
            Label::Class(c) if *c < 2 => Ok(*c),
            _ => Err(NeuralError::LabelMismatch("balanced retraining needs binary labels".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let keep = balanced_subsample(&labels, config.seed)?;
    let subset: Vec<(MolecularGraph, Label)> = keep.iter().map(|&i| data[i].clone()).collect();
    train_graph_classifier(&subset, config)
}
