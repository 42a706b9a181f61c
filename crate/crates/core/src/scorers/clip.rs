//! Piecewise-linear clip maps, thresholds, and scorer definitions.

use serde::{Deserialize, Serialize};

use super::ScorerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Validity,
    Sa,
    CovalentActivity,
    ResidueAffinity,
    Docking,
    Overlap,
    Tanimoto,
    Qed,
    External,
    /// 1 when a given substructure is present, else 0.
    Motif,
}

impl ScorerKind {
    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::Validity => "validity",
            ScorerKind::Sa => "sa",
            ScorerKind::CovalentActivity => "covalent_activity",
            ScorerKind::ResidueAffinity => "residue_affinity",
            ScorerKind::Docking => "docking",
            ScorerKind::Overlap => "overlap",
            ScorerKind::Tanimoto => "tanimoto",
            ScorerKind::Qed => "qed",
            ScorerKind::External => "external",
            ScorerKind::Motif => "motif",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Monotone piecewise-linear map with constant extension beyond the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMap {
    knots: Vec<(f64, f64)>,
}

impl ClipMap {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, ScorerError> {
        if knots.is_empty() {
            return Err(ScorerError::Config("clip map needs at least one knot".into()));
        }
        for &(x, y) in &knots {
            if !x.is_finite() || !y.is_finite() || !(0.0..=1.0).contains(&y) {
                return Err(ScorerError::Config(format!("invalid knot ({x}, {y})")));
            }
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(ScorerError::Config("knots must be strictly ordered".into()));
        }
        Ok(ClipMap { knots })
    }

    pub fn identity() -> Self {
        ClipMap { knots: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        k[k.len() - 1].1
    }

    fn is_monotone(&self, direction: Direction) -> bool {
        self.knots.windows(2).all(|w| match direction {
            Direction::HigherBetter => w[1].1 >= w[0].1,
            Direction::LowerBetter => w[1].1 <= w[0].1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    AtLeast(f64),
    AtMost(f64),
}

impl Threshold {
    pub fn passes(self, raw: f64) -> bool {
        match self {
            Threshold::AtLeast(t) => raw >= t,
            Threshold::AtMost(t) => raw <= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedScorer {
    pub name: String,
    pub kind: ScorerKind,
    pub clip: ClipMap,
    pub threshold: Option<Threshold>,
    /// Raw values on the unfavourable side of this cutoff clip to 0.
    pub hard_floor: Option<f64>,
    pub weight: f64,
    pub direction: Direction,
    pub enabled: bool,
}

impl ClippedScorer {
    pub fn new(name: &str, kind: ScorerKind, clip: ClipMap, direction: Direction) -> Self {
        ClippedScorer {
            name: name.to_string(),
            kind,
            clip,
            threshold: None,
            hard_floor: None,
            weight: 1.0,
            direction,
            enabled: true,
        }
    }

    pub fn with_threshold(mut self, t: Threshold) -> Self {
        self.threshold = Some(t);
        self
    }

    pub fn with_hard_floor(mut self, floor: f64) -> Self {
        self.hard_floor = Some(floor);
        self
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(ScorerError::Config(format!("scorer {}: weight must be finite and >= 0", self.name)));
        }
        if !self.clip.is_monotone(self.direction) {
            return Err(ScorerError::Config(format!(
                "scorer {}: clip map is not monotone in the declared direction",
                self.name
            )));
        }
        Ok(())
    }

    /// Participates in reward, ranking and desirability.
    pub fn is_active(&self) -> bool {
        self.enabled && self.weight > 0.0
    }

    pub fn clip(&self, raw: f64) -> Result<f64, ScorerError> {
        if !raw.is_finite() {
            return Err(ScorerError::NonFinite { scorer: self.name.clone(), value: raw });
        }
        if let Some(floor) = self.hard_floor {
            let below = match self.direction {
                Direction::HigherBetter => raw < floor,
                Direction::LowerBetter => raw > floor,
            };
            if below {
                return Ok(0.0);
            }
        }
        Ok(self.clip.eval(raw))
    }

    pub fn passes(&self, raw: f64) -> bool {
        self.threshold.is_none_or(|t| t.passes(raw))
    }

    /// Raw value assigned when no score is available: the end of the clip
    /// domain that maps to the least favourable value.
    pub fn worst_raw(&self) -> f64 {
        let k = self.clip.knots();
        match self.direction {
            Direction::HigherBetter => k[0].0,
            Direction::LowerBetter => k[k.len() - 1].0,
        }
    }
}
