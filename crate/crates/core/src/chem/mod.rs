//! Molecular graphs: SMILES reading, canonical writing, circular fingerprints,
//! and substructure search.

pub mod canon;
pub mod corpus;
pub mod element;
pub mod fingerprint;
pub mod graph;
pub mod rings;
pub mod smiles;
pub mod substructure;

pub use canon::{canonicalize, symmetry_classes};
pub use corpus::{parse_corpus, read_corpus, CorpusEntry};
pub use element::Element;
pub use fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, FINGERPRINT_RADIUS, FINGERPRINT_WIDTH};
pub use graph::{Atom, Bond, BondOrder, MolecularGraph};
pub use smiles::{parse_smiles, tokenize_smiles, validity_check};
pub use substructure::{count_matches, count_unique_matches, has_substructure, substructure_match};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ChemError {
    #[error("empty SMILES")]
    Empty,
    #[error("unbalanced parenthesis at position {position}")]
    UnbalancedParenthesis { position: usize },
    #[error("ring closure error at position {position}: {message}")]
    RingClosure { position: usize, message: String },
    #[error("unknown atom symbol '{symbol}' at position {position}")]
    UnknownSymbol { symbol: String, position: usize },
    #[error("valence violation on atom {atom} ({element}): valence {valence}")]
    ValenceViolation { atom: usize, element: String, valence: u32 },
    #[error("aromaticity error: {0}")]
    Aromaticity(String),
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("fingerprint width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
}

impl ChemError {
    /// Stable short name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ChemError::Empty => "empty",
            ChemError::UnbalancedParenthesis { .. } => "unbalanced_parenthesis",
            ChemError::RingClosure { .. } => "ring_closure",
            ChemError::UnknownSymbol { .. } => "unknown_symbol",
            ChemError::ValenceViolation { .. } => "valence",
            ChemError::Aromaticity(_) => "aromaticity",
            ChemError::Syntax { .. } => "syntax",
            ChemError::InvalidGraph(_) => "invalid_graph",
            ChemError::WidthMismatch(..) => "width_mismatch",
        }
    }
}
