//! Clipped multi-objective scoring: clip maps, thresholds, registry, reward,
//! and external score ingestion.

pub mod clip;
pub mod external;
pub mod presets;
pub mod registry;

pub use clip::{ClipMap, ClippedScorer, Direction, ScorerKind, Threshold};
pub use external::{ingest_external_scores, parse_external_scores, ExternalScores};
pub use presets::{
    default_scorer, default_source, preset_registry, Preset, ScorerSpec, Target, ThresholdOp, ThresholdSpec,
    RESIDUE_CLASSES, TANIMOTO_REFERENCE,
};
pub use registry::{is_desirable, reward, MoleculePredictor, RawSource, ScoreEntry, ScoreVector, ScorerRegistry};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScorerError {
    #[error("scorer configuration: {0}")]
    Config(String),
    #[error("scorer {scorer}: non-finite raw score {value}")]
    NonFinite { scorer: String, value: f64 },
    #[error("no value for scorer '{0}'")]
    MissingScorer(String),
    #[error("no active scorers")]
    EmptyActiveSet,
    #[error("external scores line {line}: {message}")]
    External { line: usize, message: String },
    #[error("scorer {scorer} failed: {message}")]
    Evaluation { scorer: String, message: String },
    #[error("{0}")]
    Io(String),
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

/// Score table: `id,smiles,<name>_raw,<name>_clipped,...,desirable`, preceded
/// by a `# config_hash=` comment line. Invalid molecules leave raw cells empty.
pub fn score_csv(vectors: &[ScoreVector], names: &[&str], config_hash: &str) -> Result<String, ScorerError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "smiles".to_string()];
    for n in names {
        header.push(format!("{n}_raw"));
        header.push(format!("{n}_clipped"));
    }
    header.push("desirable".into());
    let io = |e: csv::Error| ScorerError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for v in vectors {
        let mut row = vec![v.id.clone(), v.smiles.clone()];
        for n in names {
            let e = v.get(n).ok_or_else(|| ScorerError::MissingScorer(n.to_string()))?;
            row.push(e.raw.map(fmt_value).unwrap_or_default());
            row.push(fmt_value(e.clipped));
        }
        row.push(v.desirable.to_string());
        w.write_record(&row).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| ScorerError::Io(e.to_string()))?)
        .map_err(|e| ScorerError::Io(e.to_string()))?;
    Ok(format!("# config_hash={config_hash}\n{body}"))
}
