//! Scorer registry: raw-score sources, score vectors, desirability and reward.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::clip::{ClippedScorer, ScorerKind};
use super::external::ExternalScores;
use super::ScorerError;
use crate::chem::{canonicalize, has_substructure, morgan_fingerprint, parse_smiles, tanimoto, Fingerprint, MolecularGraph};
use crate::descriptors::{qed, sa_score, FragmentScoreTable};

/// A trained model mapping a molecule to one raw score.
pub trait MoleculePredictor: Send + Sync {
    fn predict(&self, m: &MolecularGraph) -> f64;
}

/// Where a scorer's raw value comes from.
#[derive(Clone)]
pub enum RawSource {
    /// 1 for a parsed molecule; invalid molecules never reach a source.
    Validity,
    Sa(Arc<FragmentScoreTable>),
    Qed,
    /// Maximum similarity to any reference fingerprint.
    Tanimoto(Arc<Vec<Fingerprint>>),
    /// 1 when the query substructure is present.
    Motif(Arc<MolecularGraph>),
    Predictor(Arc<dyn MoleculePredictor>),
    /// Looked up by molecule id, then by canonical SMILES; missing entries
    /// score the worst raw value.
    External(Arc<ExternalScores>),
    /// No model or data configured; every molecule scores the worst raw value.
    Unavailable,
}

impl fmt::Debug for RawSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RawSource::Validity => "validity",
            RawSource::Sa(_) => "sa-table",
            RawSource::Qed => "qed",
            RawSource::Tanimoto(_) => "tanimoto",
            RawSource::Motif(_) => "motif",
            RawSource::Predictor(_) => "predictor",
            RawSource::External(_) => "external",
            RawSource::Unavailable => "unavailable",
        };
        f.write_str(s)
    }
}

impl RawSource {
    pub fn tanimoto_references(smiles: &[&str]) -> Result<Self, ScorerError> {
        let fps = smiles
            .iter()
            .map(|s| {
                parse_smiles(s)
                    .map(|m| morgan_fingerprint(&m))
                    .map_err(|e| ScorerError::Config(format!("reference '{s}': {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RawSource::Tanimoto(Arc::new(fps)))
    }

    pub fn motif(smiles: &str) -> Result<Self, ScorerError> {
        let q = parse_smiles(smiles).map_err(|e| ScorerError::Config(format!("motif '{smiles}': {e}")))?;
        Ok(RawSource::Motif(Arc::new(q)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreEntry {
    pub name: String,
    /// None for invalid molecules.
    pub raw: Option<f64>,
    pub clipped: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector {
    pub id: String,
    pub smiles: String,
    pub canonical: Option<String>,
    pub valid: bool,
    pub entries: Vec<ScoreEntry>,
    pub desirable: bool,
}

impl ScoreVector {
    pub fn get(&self, name: &str) -> Option<&ScoreEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn clipped(&self, name: &str) -> Result<f64, ScorerError> {
        self.get(name)
            .map(|e| e.clipped)
            .ok_or_else(|| ScorerError::MissingScorer(name.to_string()))
    }
}

/// True iff the molecule is valid and every named scorer's threshold passes
/// on its raw value.
pub fn is_desirable(v: &ScoreVector, active: &[&str]) -> Result<bool, ScorerError> {
    let mut ok = v.valid;
    for name in active {
        let e = v.get(name).ok_or_else(|| ScorerError::MissingScorer(name.to_string()))?;
        ok &= e.passes;
    }
    Ok(ok)
}

/// Weighted mean of clipped values over `(name, weight)` pairs; 0 for an
/// invalid molecule.
pub fn reward(v: &ScoreVector, active: &[(&str, f64)]) -> Result<f64, ScorerError> {
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    if active.is_empty() || total <= 0.0 {
        return Err(ScorerError::EmptyActiveSet);
    }
    let mut acc = 0.0;
    for &(name, w) in active {
        acc += w * v.clipped(name)?;
    }
    if !v.valid {
        return Ok(0.0);
    }
    Ok((acc / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Default)]
pub struct ScorerRegistry {
    entries: Vec<(ClippedScorer, RawSource)>,
    warned: Arc<Vec<AtomicBool>>,
}

impl ScorerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, scorer: ClippedScorer, source: RawSource) -> Result<(), ScorerError> {
        scorer.validate()?;
        if self.entries.iter().any(|(s, _)| s.name == scorer.name) {
            return Err(ScorerError::Config(format!("duplicate scorer name '{}'", scorer.name)));
        }
        self.entries.push((scorer, source));
        self.warned = Arc::new((0..self.entries.len()).map(|_| AtomicBool::new(false)).collect());
        Ok(())
    }

    pub fn scorers(&self) -> impl Iterator<Item = &ClippedScorer> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn scorer(&self, name: &str) -> Option<&ClippedScorer> {
        self.scorers().find(|s| s.name == name)
    }

    pub fn scorer_mut(&mut self, name: &str) -> Option<&mut ClippedScorer> {
        self.entries.iter_mut().map(|(s, _)| s).find(|s| s.name == name)
    }

    pub fn set_source(&mut self, name: &str, source: RawSource) -> Result<(), ScorerError> {
        let slot = self
            .entries
            .iter_mut()
            .find(|(s, _)| s.name == name)
            .ok_or_else(|| ScorerError::MissingScorer(name.to_string()))?;
        slot.1 = source;
        Ok(())
    }

    pub fn source(&self, name: &str) -> Option<&RawSource> {
        self.entries.iter().find(|(s, _)| s.name == name).map(|(_, src)| src)
    }

    pub fn active_names(&self) -> Vec<&str> {
        self.scorers().filter(|s| s.is_active()).map(|s| s.name.as_str()).collect()
    }

    pub fn active_weights(&self) -> Vec<(&str, f64)> {
        self.scorers()
            .filter(|s| s.is_active())
            .map(|s| (s.name.as_str(), s.weight))
            .collect()
    }

    pub fn reward(&self, v: &ScoreVector) -> Result<f64, ScorerError> {
        reward(v, &self.active_weights())
    }

    fn raw_value(
        &self,
        idx: usize,
        source: &RawSource,
        scorer: &ClippedScorer,
        id: &str,
        m: &MolecularGraph,
        canonical: &str,
    ) -> Result<f64, ScorerError> {
        let v = match source {
            RawSource::Validity => 1.0,
            RawSource::Sa(t) => sa_score(m, t).map_err(|e| ScorerError::Evaluation {
                scorer: scorer.name.clone(),
                message: e.to_string(),
            })?,
            RawSource::Qed => qed(m),
            RawSource::Tanimoto(refs) => {
                let fp = morgan_fingerprint(m);
                let mut best: f64 = 0.0;
                for r in refs.iter() {
                    best = best.max(tanimoto(&fp, r).map_err(|e| ScorerError::Evaluation {
                        scorer: scorer.name.clone(),
                        message: e.to_string(),
                    })?);
                }
                best
            }
            RawSource::Motif(q) => f64::from(u8::from(has_substructure(q, m))),
            RawSource::Predictor(p) => p.predict(m),
            RawSource::External(ext) => ext.get(id).or_else(|| ext.get(canonical)).unwrap_or_else(|| scorer.worst_raw()),
            RawSource::Unavailable => {
                if !self.warned[idx].swap(true, Ordering::Relaxed) {
                    log::warn!(
                        "scorer '{}' has no model or external scores configured; using worst raw value {}",
                        scorer.name,
                        scorer.worst_raw()
                    );
                }
                scorer.worst_raw()
            }
        };
        if !v.is_finite() {
            return Err(ScorerError::NonFinite { scorer: scorer.name.clone(), value: v });
        }
        Ok(v)
    }

    /// Scores one SMILES string. Parse failures give an invalid vector with
    /// every clipped value 0.
    pub fn evaluate(&self, id: &str, smiles: &str) -> Result<ScoreVector, ScorerError> {
        let parsed = parse_smiles(smiles).ok().filter(|m| !m.is_empty());
        self.evaluate_parsed(id, smiles, parsed.as_ref())
    }

    pub fn evaluate_parsed(
        &self,
        id: &str,
        smiles: &str,
        m: Option<&MolecularGraph>,
    ) -> Result<ScoreVector, ScorerError> {
        let Some(m) = m else {
            return Ok(ScoreVector {
                id: id.to_string(),
                smiles: smiles.to_string(),
                canonical: None,
                valid: false,
                entries: self
                    .scorers()
                    .map(|s| ScoreEntry { name: s.name.clone(), raw: None, clipped: 0.0, passes: false })
                    .collect(),
                desirable: false,
            });
        };
        let canonical = canonicalize(m);
        let mut entries = Vec::with_capacity(self.entries.len());
        for (idx, (scorer, source)) in self.entries.iter().enumerate() {
            let raw = self.raw_value(idx, source, scorer, id, m, &canonical)?;
            entries.push(ScoreEntry {
                name: scorer.name.clone(),
                raw: Some(raw),
                clipped: scorer.clip(raw)?,
                passes: scorer.passes(raw),
            });
        }
        let mut v = ScoreVector {
            id: id.to_string(),
            smiles: smiles.to_string(),
            canonical: Some(canonical),
            valid: true,
            entries,
            desirable: false,
        };
        v.desirable = is_desirable(&v, &self.active_names())?;
        Ok(v)
    }

    /// Scores a batch in parallel; output order follows input order.
    pub fn evaluate_batch(&self, items: &[(String, String)]) -> Result<Vec<ScoreVector>, ScorerError> {
        items.par_iter().map(|(id, s)| self.evaluate(id, s)).collect()
    }

    pub fn kinds(&self) -> Vec<ScorerKind> {
        self.scorers().map(|s| s.kind).collect()
    }
}
