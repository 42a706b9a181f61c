//! Dense, recurrent and graph networks with reverse-mode gradients: the SMILES
//! generator, graph classifiers and regressors, and GradCAM attribution.

pub mod checkpoint;
pub mod generator;
pub mod gradcam;
pub mod graph_model;
pub mod params;
pub mod tape;

pub use generator::{
    pretrain_generator, token_cross_entropy, GeneratorArch, GeneratorModel, PretrainConfig, PretrainReport, TokenSequence,
    Vocabulary, BOS, EOS, PAD,
};
pub use gradcam::{gradcam, AttributionMap, TAG_CUTOFF};
pub use graph_model::{
    balanced_subsample, node_features, retrain_balanced, train_graph_classifier, GraphArch, GraphInput, GraphModel,
    GraphPredictor, GraphTrainConfig, GraphTrainReport, HeadKind, Label, LayerKind,
};
pub use params::{ParamId, ParamStore, Sgd, SgdConfig};
pub use tape::{Tape, Var};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NeuralError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("token '{token}' in '{smiles}' is not in the vocabulary")]
    UnknownToken { token: String, smiles: String },
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("{0} class absent from the data")]
    MissingClass(String),
    #[error("invalid molecule: {0}")]
    InvalidMolecule(String),
    #[error("model configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Io(String),
}
