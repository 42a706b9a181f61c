//! Default scorer definitions and the eight target presets.
//!
//! Every preset carries the base scorers (validity, SA, covalent activity,
//! residue affinity, docking); levels 2-4 add overlap, QED and Tanimoto
//! similarity cumulatively.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::clip::{ClipMap, ClippedScorer, Direction, ScorerKind, Threshold};
use super::registry::{RawSource, ScorerRegistry};
use super::ScorerError;
use crate::descriptors::FragmentScoreTable;

/// Tanimoto reference scaffold (quinoline).
pub const TANIMOTO_REFERENCE: &str = "c1ccc2ncccc2c1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Egfr,
    Ache,
}

impl Target {
    /// Residue-class index scored by the residue-affinity model
    /// (Cys for EGFR, Ser/Thr for ACHE).
    pub fn residue_class(self) -> usize {
        match self {
            Target::Egfr => RESIDUE_CLASSES.iter().position(|&c| c == "Cys").unwrap(),
            Target::Ache => RESIDUE_CLASSES.iter().position(|&c| c == "Ser/Thr").unwrap(),
        }
    }
}

pub const RESIDUE_CLASSES: [&str; 6] = ["Cys", "Ser/Thr", "Lys/Nt", "Asp/Glu", "His", "Tyr"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub target: Target,
    pub level: u8,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self, ScorerError> {
        let lower = name.trim().to_ascii_lowercase();
        let (t, l) = lower
            .split_once('-')
            .ok_or_else(|| ScorerError::Config(format!("unknown preset '{name}'")))?;
        let target = match t {
            "egfr" => Target::Egfr,
            "ache" => Target::Ache,
            _ => return Err(ScorerError::Config(format!("unknown preset '{name}'"))),
        };
        let level: u8 = l.parse().map_err(|_| ScorerError::Config(format!("unknown preset '{name}'")))?;
        if !(1..=4).contains(&level) {
            return Err(ScorerError::Config(format!("preset level must be 1-4 in '{name}'")));
        }
        Ok(Preset { target, level })
    }

    pub fn name(&self) -> String {
        let t = match self.target {
            Target::Egfr => "egfr",
            Target::Ache => "ache",
        };
        format!("{t}-{}", self.level)
    }

    pub fn kinds(&self) -> Vec<ScorerKind> {
        let mut k = vec![
            ScorerKind::Validity,
            ScorerKind::Sa,
            ScorerKind::CovalentActivity,
            ScorerKind::ResidueAffinity,
            ScorerKind::Docking,
        ];
        if self.level >= 2 {
            k.push(ScorerKind::Overlap);
        }
        if self.level >= 3 {
            k.push(ScorerKind::Qed);
        }
        if self.level >= 4 {
            k.push(ScorerKind::Tanimoto);
        }
        k
    }

    pub fn all() -> Vec<Preset> {
        [Target::Egfr, Target::Ache]
            .into_iter()
            .flat_map(|target| (1..=4).map(move |level| Preset { target, level }))
            .collect()
    }
}

fn knots(k: &[(f64, f64)]) -> ClipMap {
    ClipMap::new(k.to_vec()).expect("built-in knots are valid")
}

/// Default clip map, threshold and floor for each scorer kind.
pub fn default_scorer(kind: ScorerKind) -> ClippedScorer {
    use Direction::*;
    let name = kind.name();
    match kind {
        ScorerKind::Validity => ClippedScorer::new(name, kind, ClipMap::identity(), HigherBetter)
            .with_threshold(Threshold::AtLeast(1.0)),
        ScorerKind::Sa => ClippedScorer::new(name, kind, knots(&[(3.0, 1.0), (8.0, 0.0)]), LowerBetter)
            .with_threshold(Threshold::AtMost(6.0)),
        ScorerKind::CovalentActivity | ScorerKind::ResidueAffinity => {
            ClippedScorer::new(name, kind, knots(&[(0.5, 0.0), (1.0, 1.0)]), HigherBetter)
                .with_hard_floor(0.5)
                .with_threshold(Threshold::AtLeast(0.75))
        }
        ScorerKind::Docking => ClippedScorer::new(name, kind, knots(&[(-10.0, 1.0), (-4.0, 0.0)]), LowerBetter)
            .with_threshold(Threshold::AtMost(-6.0)),
        ScorerKind::Overlap => ClippedScorer::new(name, kind, knots(&[(0.0, 0.0), (160.0, 1.0)]), HigherBetter)
            .with_threshold(Threshold::AtLeast(100.0)),
        ScorerKind::Tanimoto => ClippedScorer::new(name, kind, knots(&[(0.0, 0.0), (0.4, 1.0)]), HigherBetter)
            .with_threshold(Threshold::AtLeast(0.1)),
        ScorerKind::Qed => ClippedScorer::new(name, kind, ClipMap::identity(), HigherBetter),
        ScorerKind::Motif => ClippedScorer::new(name, kind, ClipMap::identity(), HigherBetter)
            .with_threshold(Threshold::AtLeast(1.0)),
        ScorerKind::External => ClippedScorer::new(name, kind, ClipMap::identity(), HigherBetter),
    }
}

/// Default raw source for a kind: computed in-engine where possible,
/// otherwise unavailable until a model or external file is supplied.
pub fn default_source(kind: ScorerKind) -> RawSource {
    match kind {
        ScorerKind::Validity => RawSource::Validity,
        ScorerKind::Sa => RawSource::Sa(Arc::new(FragmentScoreTable::builtin().clone())),
        ScorerKind::Qed => RawSource::Qed,
        ScorerKind::Tanimoto => {
            RawSource::tanimoto_references(&[TANIMOTO_REFERENCE]).expect("reference scaffold parses")
        }
        _ => RawSource::Unavailable,
    }
}

pub fn preset_registry(preset: Preset) -> ScorerRegistry {
    let mut r = ScorerRegistry::new();
    for kind in preset.kinds() {
        r.push(default_scorer(kind), default_source(kind)).expect("preset scorers are unique and valid");
    }
    r
}

/// Per-scorer configuration; unspecified fields keep the preset or kind defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSpec {
    pub name: String,
    pub kind: Option<ScorerKind>,
    pub knots: Option<Vec<[f64; 2]>>,
    pub direction: Option<Direction>,
    pub threshold: Option<ThresholdSpec>,
    pub hard_floor: Option<f64>,
    pub weight: Option<f64>,
    pub enabled: Option<bool>,
    /// `id,score` CSV supplying raw values.
    pub external: Option<PathBuf>,
    /// Graph-model checkpoint supplying raw values.
    pub model: Option<PathBuf>,
    /// Output class of a multiclass model; defaults to the target residue class.
    pub class: Option<usize>,
    /// Reference SMILES for a Tanimoto scorer.
    pub references: Option<Vec<String>>,
    /// Query SMILES for a motif scorer.
    pub motif: Option<String>,
    /// Fragment-score table for an SA scorer.
    pub sa_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    pub op: ThresholdOp,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdOp {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "none")]
    None,
}

impl ThresholdSpec {
    pub fn to_threshold(self) -> Option<Threshold> {
        match self.op {
            ThresholdOp::AtLeast => Some(Threshold::AtLeast(self.value)),
            ThresholdOp::AtMost => Some(Threshold::AtMost(self.value)),
            ThresholdOp::None => None,
        }
    }
}

impl ScorerSpec {
    /// Applies the definition-level overrides (everything except the source)
    /// to `base`.
    pub fn apply(&self, base: &mut ClippedScorer) -> Result<(), ScorerError> {
        if let Some(k) = &self.knots {
            base.clip = ClipMap::new(k.iter().map(|p| (p[0], p[1])).collect())?;
        }
        if let Some(d) = self.direction {
            base.direction = d;
        }
        if let Some(t) = self.threshold {
            base.threshold = t.to_threshold();
        }
        if let Some(f) = self.hard_floor {
            base.hard_floor = Some(f);
        }
        if let Some(w) = self.weight {
            base.weight = w;
        }
        if let Some(e) = self.enabled {
            base.enabled = e;
        }
        base.validate()
    }

    /// Definition for a scorer not present in the preset.
    pub fn build_new(&self) -> Result<ClippedScorer, ScorerError> {
        let kind = self
            .kind
            .ok_or_else(|| ScorerError::Config(format!("scorer '{}' is not in the preset and has no kind", self.name)))?;
        let mut s = default_scorer(kind);
        s.name = self.name.clone();
        self.apply(&mut s)?;
        Ok(s)
    }
}
