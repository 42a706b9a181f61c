//! Token-level GRU generator over SMILES strings.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, load_params, params_to_tensors, save_checkpoint, CheckpointManifest};
use super::params::{ParamId, ParamStore, Sgd, SgdConfig};
use super::tape::{Mat, Tape, Var};
use super::NeuralError;
use crate::chem::{parse_smiles, tokenize_smiles};
use crate::io::config_hash;

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
const SPECIALS: [&str; 3] = ["<pad>", "<bos>", "<eos>"];

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Special tokens followed by every corpus token in sorted order.
    pub fn from_smiles<'a>(corpus: impl IntoIterator<Item = &'a str>) -> Self {
        let mut set = BTreeSet::new();
        for s in corpus {
            set.extend(tokenize_smiles(s));
        }
        let tokens = SPECIALS.iter().map(|s| s.to_string()).chain(set).collect();
        Self::from_tokens(tokens).expect("specials lead")
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, NeuralError> {
        if tokens.len() < SPECIALS.len() || tokens[..3].iter().zip(SPECIALS).any(|(a, b)| a != b) {
            return Err(NeuralError::Checkpoint("vocabulary must start with <pad>, <bos>, <eos>".into()));
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect::<HashMap<_, _>>();
        if index.len() != tokens.len() {
            return Err(NeuralError::Checkpoint("duplicate vocabulary token".into()));
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, smiles: &str) -> Result<Vec<usize>, NeuralError> {
        tokenize_smiles(smiles)
            .into_iter()
            .map(|t| {
                self.index.get(&t).copied().filter(|&i| i >= SPECIALS.len()).ok_or_else(|| NeuralError::UnknownToken {
                    token: t.clone(),
                    smiles: smiles.to_string(),
                })
            })
            .collect()
    }

    /// Concatenated token text; special tokens are dropped.
    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().filter(|&&i| i >= SPECIALS.len()).map(|&i| self.tokens[i].as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorArch {
    pub embed: usize,
    pub hidden: usize,
    /// Maximum generated tokens per sequence, EOS included.
    pub max_len: usize,
}

impl Default for GeneratorArch {
    fn default() -> Self {
        GeneratorArch { embed: 64, hidden: 256, max_len: 128 }
    }
}

/// A generated or corpus token sequence. `tokens` excludes BOS and EOS;
/// `log_probs` holds one temperature-1 log-probability per generation step,
/// including the EOS step when `terminated`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub tokens: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub terminated: bool,
}

impl TokenSequence {
    pub fn from_tokens(tokens: Vec<usize>) -> Self {
        TokenSequence { tokens, log_probs: Vec::new(), terminated: true }
    }

    pub fn steps(&self) -> usize {
        self.tokens.len() + usize::from(self.terminated)
    }

    pub fn log_prob(&self) -> f64 {
        self.log_probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct GruIds {
    emb: ParamId,
    w_i: ParamId,
    b_i: ParamId,
    w_h: ParamId,
    b_h: ParamId,
    w_o: ParamId,
    b_o: ParamId,
}

impl GruIds {
    fn lookup(p: &ParamStore) -> Self {
        let id = |n: &str| p.id(n).expect("generator parameter");
        GruIds {
            emb: id("embedding"),
            w_i: id("gru.w_input"),
            b_i: id("gru.b_input"),
            w_h: id("gru.w_hidden"),
            b_h: id("gru.b_hidden"),
            w_o: id("out.w"),
            b_o: id("out.b"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorModel {
    pub vocab: Vocabulary,
    pub arch: GeneratorArch,
    pub params: ParamStore,
    pub config_hash: String,
    ids: GruIds,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_softmax_row(row: &[f64]) -> Vec<f64> {
    let m = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let lse = m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
    row.iter().map(|&x| x - lse).collect()
}

impl GeneratorModel {
    pub fn new(vocab: Vocabulary, arch: GeneratorArch, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v, e, h) = (vocab.len(), arch.embed, arch.hidden);
        let mut p = ParamStore::new();
        p.add_glorot("embedding", v, e, &mut rng);
        p.add_glorot("gru.w_input", e, 3 * h, &mut rng);
        p.add_zeros("gru.b_input", 1, 3 * h);
        p.add_glorot("gru.w_hidden", h, 3 * h, &mut rng);
        p.add_zeros("gru.b_hidden", 1, 3 * h);
        p.add_glorot("out.w", h, v, &mut rng);
        p.add_zeros("out.b", 1, v);
        let ids = GruIds::lookup(&p);
        GeneratorModel { vocab, arch, params: p, config_hash: String::new(), ids }
    }

    pub fn smiles(&self, seq: &TokenSequence) -> String {
        self.vocab.decode(&seq.tokens)
    }

    /// Teacher-forced pass. Returns the per-step target log-probabilities
    /// (time-major, `steps x batch` rows) and the number of steps.
    fn forward(&self, tape: &mut Tape, seqs: &[TokenSequence]) -> (Var, usize) {
        let b = seqs.len();
        let h = self.arch.hidden;
        let steps = seqs.iter().map(TokenSequence::steps).max().unwrap_or(0);
        let mut inputs = Vec::with_capacity(steps * b);
        let mut targets = Vec::with_capacity(steps * b);
        for t in 0..steps {
            for s in seqs {
                inputs.push(match t {
                    0 => BOS,
                    _ => s.tokens.get(t - 1).copied().unwrap_or(PAD),
                });
                targets.push(match s.tokens.get(t) {
                    Some(&tok) => tok,
                    None if t == s.tokens.len() && s.terminated => EOS,
                    None => PAD,
                });
            }
        }
        let ids = self.ids;
        let emb = tape.param(&self.params, ids.emb);
        let w_i = tape.param(&self.params, ids.w_i);
        let b_i = tape.param(&self.params, ids.b_i);
        let w_h = tape.param(&self.params, ids.w_h);
        let b_h = tape.param(&self.params, ids.b_h);
        let w_o = tape.param(&self.params, ids.w_o);
        let b_o = tape.param(&self.params, ids.b_o);

        let x = tape.gather_rows(emb, &inputs);
        let xw = tape.matmul(x, w_i);
        let xi_all = tape.add_row(xw, b_i);
        let mut state = tape.constant(Mat::zeros((b, h)));
        let mut hidden = Vec::with_capacity(steps);
        for t in 0..steps {
            let xi = tape.slice_rows(xi_all, t * b, (t + 1) * b);
            let hw = tape.matmul(state, w_h);
            let hh = tape.add_row(hw, b_h);
            let (xr, xz, xn) = (tape.slice_cols(xi, 0, h), tape.slice_cols(xi, h, 2 * h), tape.slice_cols(xi, 2 * h, 3 * h));
            let (hr, hz, hn) = (tape.slice_cols(hh, 0, h), tape.slice_cols(hh, h, 2 * h), tape.slice_cols(hh, 2 * h, 3 * h));
            let ar = tape.add(xr, hr);
            let r = tape.sigmoid(ar);
            let az = tape.add(xz, hz);
            let z = tape.sigmoid(az);
            let rh = tape.mul(r, hn);
            let an = tape.add(xn, rh);
            let n = tape.tanh(an);
            let d = tape.sub(state, n);
            let zd = tape.mul(z, d);
            state = tape.add(n, zd);
            hidden.push(state);
        }
        let hs = tape.concat_rows(&hidden);
        let lw = tape.matmul(hs, w_o);
        let logits = tape.add_row(lw, b_o);
        let lsm = tape.log_softmax_rows(logits);
        (tape.pick_cols(lsm, &targets), steps)
    }

    fn step_mask(seqs: &[TokenSequence], steps: usize) -> Vec<bool> {
        let mut mask = Vec::with_capacity(steps * seqs.len());
        for t in 0..steps {
            mask.extend(seqs.iter().map(|s| t < s.steps()));
        }
        mask
    }

    /// Teacher-forced log-probability of each sequence (temperature 1).
    pub fn sequence_log_probs(&self, seqs: &[TokenSequence]) -> Vec<f64> {
        let mut out = Vec::with_capacity(seqs.len());
        for chunk in seqs.chunks(256) {
            let mut tape = Tape::new();
            let (picked, steps) = self.forward(&mut tape, chunk);
            let v = tape.value(picked);
            let mask = Self::step_mask(chunk, steps);
            let mut sums = vec![0.0; chunk.len()];
            for (row, &m) in mask.iter().enumerate() {
                if m {
                    sums[row % chunk.len()] += v[[row, 0]];
                }
            }
            out.extend(sums);
        }
        out
    }

    /// `sum_b weight_b * log p(seq_b)` and its gradient for every parameter.
    pub fn weighted_log_prob_gradient(&self, seqs: &[TokenSequence], weights: &[f64]) -> (f64, Vec<Array2<f64>>) {
        assert_eq!(seqs.len(), weights.len());
        if seqs.is_empty() {
            return (0.0, self.params.zeros_like());
        }
        let mut tape = Tape::new();
        let (picked, steps) = self.forward(&mut tape, seqs);
        let mask = Self::step_mask(seqs, steps);
        let b = seqs.len();
        let w = Mat::from_shape_fn((steps * b, 1), |(row, _)| if mask[row] { weights[row % b] } else { 0.0 });
        let wv = tape.constant(w);
        let prod = tape.mul(picked, wv);
        let total = tape.sum(prod);
        let grads = tape.backward(total);
        (tape.scalar(total), self.params.gradients(&tape, &grads))
    }

    /// Samples `n` sequences. Stored log-probabilities are under the model
    /// distribution (temperature 1) whatever the sampling temperature.
    pub fn sample(&self, n: usize, temperature: f64, rng: &mut ChaCha8Rng) -> Vec<TokenSequence> {
        assert!(temperature > 0.0, "temperature must be positive");
        let mut out = Vec::with_capacity(n);
        let mut left = n;
        while left > 0 {
            let b = left.min(256);
            out.extend(self.sample_batch(b, temperature, rng));
            left -= b;
        }
        out
    }

    fn sample_batch(&self, b: usize, temperature: f64, rng: &mut ChaCha8Rng) -> Vec<TokenSequence> {
        let h = self.arch.hidden;
        let p = |id| self.params.value(id);
        let ids = self.ids;
        let mut seqs: Vec<TokenSequence> =
            (0..b).map(|_| TokenSequence { tokens: Vec::new(), log_probs: Vec::new(), terminated: false }).collect();
        let mut rows: Vec<usize> = (0..b).collect();
        let mut current = vec![BOS; b];
        let mut state = Array2::<f64>::zeros((b, h));
        for _ in 0..self.arch.max_len {
            if rows.is_empty() {
                break;
            }
            let x = p(ids.emb).select(Axis(0), &current);
            let xi = x.dot(p(ids.w_i)) + p(ids.b_i);
            let hh = state.dot(p(ids.w_h)) + p(ids.b_h);
            let mut next = Array2::<f64>::zeros(state.dim());
            for r in 0..rows.len() {
                for k in 0..h {
                    let rg = sigmoid(xi[[r, k]] + hh[[r, k]]);
                    let zg = sigmoid(xi[[r, h + k]] + hh[[r, h + k]]);
                    let ng = (xi[[r, 2 * h + k]] + rg * hh[[r, 2 * h + k]]).tanh();
                    next[[r, k]] = ng + zg * (state[[r, k]] - ng);
                }
            }
            state = next;
            let logits = state.dot(p(ids.w_o)) + p(ids.b_o);
            let mut keep = Vec::with_capacity(rows.len());
            let mut next_tokens = Vec::with_capacity(rows.len());
            for (r, &seq_idx) in rows.iter().enumerate() {
                let row = logits.row(r).to_vec();
                let lsm = log_softmax_row(&row);
                let scaled = log_softmax_row(&row.iter().map(|x| x / temperature).collect::<Vec<_>>());
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut tok = scaled.len() - 1;
                for (i, lp) in scaled.iter().enumerate() {
                    acc += lp.exp();
                    if u < acc {
                        tok = i;
                        break;
                    }
                }
                // PAD and BOS are never valid outputs; fall back to the best real token.
                if tok == PAD || tok == BOS {
                    tok = (EOS..scaled.len())
                        .max_by(|&a, &c| scaled[a].total_cmp(&scaled[c]).then(c.cmp(&a)))
                        .expect("vocabulary has EOS");
                }
                let s = &mut seqs[seq_idx];
                s.log_probs.push(lsm[tok]);
                if tok == EOS {
                    s.terminated = true;
                } else {
                    s.tokens.push(tok);
                    keep.push(r);
                    next_tokens.push(tok);
                }
            }
            rows = keep.iter().map(|&r| rows[r]).collect();
            state = state.select(Axis(0), &keep);
            current = next_tokens;
        }
        seqs
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        let manifest = CheckpointManifest {
            format_version: super::checkpoint::FORMAT_VERSION,
            model: "generator".into(),
            config_hash: self.config_hash.clone(),
            vocabulary: self.vocab.tokens().to_vec(),
            config: serde_json::to_value(self.arch).expect("arch serialises"),
        };
        save_checkpoint(path, &params_to_tensors(&self.params), &manifest)
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let (tensors, manifest) = load_checkpoint(path)?;
        if manifest.model != "generator" {
            return Err(NeuralError::Checkpoint(format!("expected a generator checkpoint, found '{}'", manifest.model)));
        }
        let arch: GeneratorArch =
            serde_json::from_value(manifest.config).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        let vocab = Vocabulary::from_tokens(manifest.vocabulary)?;
        let mut m = GeneratorModel::new(vocab, arch, 0);
        load_params(&mut m.params, &tensors)?;
        m.config_hash = manifest.config_hash;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainConfig {
    pub arch: GeneratorArch,
    pub sgd: SgdConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            arch: GeneratorArch::default(),
            sgd: SgdConfig { learning_rate: 0.3, momentum: 0.9, clip_norm: 5.0 },
            epochs: 40,
            batch_size: 16,
            holdout_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean next-token cross-entropy (nats).
    pub train_loss: f64,
    pub holdout_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PretrainReport {
    pub epochs: Vec<EpochStats>,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Corpus lines dropped as unparsable or longer than the maximum length.
    pub skipped: usize,
    /// Cross-entropy of the uniform distribution over the vocabulary, ln V.
    pub uniform_loss: f64,
}

/// Mean per-token cross-entropy of `seqs` under the model.
pub fn token_cross_entropy(model: &GeneratorModel, seqs: &[TokenSequence]) -> f64 {
    let steps: usize = seqs.iter().map(TokenSequence::steps).sum();
    -model.sequence_log_probs(seqs).iter().sum::<f64>() / steps.max(1) as f64
}

/// Batches of similar length, in shuffled batch order.
fn length_batches(seqs: &[TokenSequence], batch: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| seqs[i].steps());
    let mut batches: Vec<Vec<usize>> = order.chunks(batch.max(1)).map(<[usize]>::to_vec).collect();
    batches.shuffle(rng);
    batches
}

/// Trains a fresh generator on `corpus` by next-token cross-entropy.
pub fn pretrain_generator(corpus: &[String], config: &PretrainConfig) -> Result<(GeneratorModel, PretrainReport), NeuralError> {
    let mut skipped = 0;
    let mut kept = Vec::new();
    for s in corpus {
        if parse_smiles(s).is_ok() && tokenize_smiles(s).len() < config.arch.max_len {
            kept.push(s.as_str());
        } else {
            skipped += 1;
        }
    }
    if kept.is_empty() {
        return Err(NeuralError::EmptyCorpus);
    }
    if skipped > 0 {
        log::warn!("pretraining skipped {skipped} unparsable or over-length corpus entries");
    }
    let vocab = Vocabulary::from_smiles(kept.iter().copied());
    let mut model = GeneratorModel::new(vocab, config.arch, config.seed);
    model.config_hash = config_hash(config);
    let mut seqs = kept
        .iter()
        .map(|s| model.vocab.encode(s).map(TokenSequence::from_tokens))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0001);
    seqs.shuffle(&mut rng);
    let n_hold = if seqs.len() > 1 { ((seqs.len() as f64) * config.holdout_fraction).round() as usize } else { 0 };
    let holdout = seqs.split_off(seqs.len() - n_hold.min(seqs.len() - 1));
    let mut opt = Sgd::new(config.sgd, &model.params);
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut token_sum = 0usize;
        for batch in length_batches(&seqs, config.batch_size, &mut rng) {
            let items: Vec<TokenSequence> = batch.iter().map(|&i| seqs[i].clone()).collect();
            let tokens: usize = items.iter().map(TokenSequence::steps).sum();
            let w = vec![-1.0 / tokens as f64; items.len()];
            let (obj, grads) = model.weighted_log_prob_gradient(&items, &w);
            opt.step(&mut model.params, &grads);
            loss_sum += obj * tokens as f64;
            token_sum += tokens;
        }
        let holdout_loss = (!holdout.is_empty()).then(|| token_cross_entropy(&model, &holdout));
        let stats = EpochStats { epoch: epoch + 1, train_loss: loss_sum / token_sum as f64, holdout_loss };
        log::info!("pretrain epoch {} loss {:.4} holdout {:?}", stats.epoch, stats.train_loss, stats.holdout_loss);
        epochs.push(stats);
    }
    let uniform_loss = (model.vocab.len() as f64).ln();
    let report = PretrainReport { epochs, train_size: seqs.len(), holdout_size: holdout.len(), skipped, uniform_loss };
    Ok((model, report))
}
