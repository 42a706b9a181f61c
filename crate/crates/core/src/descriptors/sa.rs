//! Synthetic accessibility (Ertl-style) from fragment frequencies plus
//! complexity penalties.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::chem::fingerprint::environment_counts;
use crate::chem::{parse_corpus, parse_smiles, symmetry_classes, BondOrder, Element, MolecularGraph};

const FORMAT_HEADER: &str = "# covgen fragment-score table v1";
/// Contribution of unseen environments when a table does not state one.
pub const DEFAULT_UNKNOWN_CONTRIBUTION: f64 = -4.0;
/// Share of all environment occurrences covered by the reference fragments.
const COVERAGE: f64 = 0.8;

static REFERENCE_CORPUS: &str = include_str!("../../data/nci_reference.smi");

#[derive(Debug, Error)]
pub enum SaError {
    #[error("empty molecule")]
    EmptyMolecule,
    #[error("no fragments in corpus")]
    EmptyCorpus,
    #[error("fragment table line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentScoreTable {
    contributions: HashMap<u64, f64>,
    /// Contribution used for environments absent from the table.
    pub unknown: f64,
    pub corpus_id: String,
    pub date: String,
}

impl FragmentScoreTable {
    /// Contribution of each environment is `log10(count / c80)`, where `count`
    /// is the number of corpus molecules containing it and `c80` is the count
    /// of the least frequent fragment among the most frequent ones that
    /// together make up 80% of all counts. Unseen environments score as if
    /// they had been seen once.
    pub fn fit<'a>(
        molecules: impl IntoIterator<Item = &'a MolecularGraph>,
        corpus_id: &str,
        date: &str,
    ) -> Result<Self, SaError> {
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for m in molecules {
            for (id, _) in environment_counts(m, 2) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(SaError::EmptyCorpus);
        }
        let mut sorted: Vec<u64> = counts.values().copied().collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let total: u64 = sorted.iter().sum();
        let target = (COVERAGE * total as f64).ceil() as u64;
        let mut acc = 0;
        let mut c80 = sorted[sorted.len() - 1];
        for &c in &sorted {
            acc += c;
            if acc >= target {
                c80 = c;
                break;
            }
        }
        let contributions = counts
            .into_iter()
            .map(|(id, c)| (id, (c as f64 / c80 as f64).log10()))
            .collect();
        Ok(FragmentScoreTable {
            contributions,
            unknown: (1.0 / c80 as f64).log10(),
            corpus_id: corpus_id.to_string(),
            date: date.to_string(),
        })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u64, f64)>, corpus_id: &str, date: &str) -> Self {
        FragmentScoreTable {
            contributions: entries.into_iter().collect(),
            unknown: DEFAULT_UNKNOWN_CONTRIBUTION,
            corpus_id: corpus_id.to_string(),
            date: date.to_string(),
        }
    }

    /// Table fitted on the bundled reference corpus.
    pub fn builtin() -> &'static FragmentScoreTable {
        static TABLE: OnceLock<FragmentScoreTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let mols: Vec<MolecularGraph> = parse_corpus(REFERENCE_CORPUS)
                .iter()
                .filter_map(|e| parse_smiles(&e.smiles).ok())
                .collect();
            FragmentScoreTable::fit(&mols, "nci_reference", "bundled").expect("reference corpus is non-empty")
        })
    }

    pub fn contribution(&self, id: u64) -> Option<f64> {
        self.contributions.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.contributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributions.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut entries: Vec<(&u64, &f64)> = self.contributions.iter().collect();
        entries.sort_by_key(|(k, _)| **k);
        let mut s = String::new();
        writeln!(s, "{FORMAT_HEADER}").unwrap();
        writeln!(s, "# corpus: {}", self.corpus_id).unwrap();
        writeln!(s, "# date: {}", self.date).unwrap();
        writeln!(s, "# unknown: {:.6}", self.unknown).unwrap();
        for (k, v) in entries {
            writeln!(s, "{k:016x}\t{v:.6}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SaError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == FORMAT_HEADER => {}
            _ => {
                return Err(SaError::Format {
                    line: 1,
                    message: "missing or unsupported version header".into(),
                })
            }
        }
        let mut corpus_id = String::new();
        let mut date = String::new();
        let mut unknown = DEFAULT_UNKNOWN_CONTRIBUTION;
        let mut contributions = HashMap::new();
        for (i, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("corpus:") {
                    corpus_id = v.trim().to_string();
                } else if let Some(v) = rest.strip_prefix("date:") {
                    date = v.trim().to_string();
                } else if let Some(v) = rest.strip_prefix("unknown:") {
                    unknown = v.trim().parse().map_err(|_| SaError::Format {
                        line: i + 1,
                        message: "bad unknown contribution".into(),
                    })?;
                }
                continue;
            }
            let err = |message: &str| SaError::Format { line: i + 1, message: message.into() };
            let (k, v) = line.split_once('\t').ok_or_else(|| err("expected <hash>\\t<contribution>"))?;
            let k = u64::from_str_radix(k.trim(), 16).map_err(|_| err("bad hash"))?;
            let v: f64 = v.trim().parse().map_err(|_| err("bad contribution"))?;
            if !v.is_finite() {
                return Err(err("non-finite contribution"));
            }
            contributions.insert(k, v);
        }
        if contributions.is_empty() {
            return Err(SaError::EmptyCorpus);
        }
        Ok(FragmentScoreTable { contributions, unknown, corpus_id, date })
    }

    pub fn save(&self, path: &Path) -> Result<(), SaError> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self, SaError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Tetrahedral centres, assigned or not: sp3 carbon with at most one H whose
/// substituents fall in distinct symmetry classes.
pub fn stereo_center_count(m: &MolecularGraph) -> usize {
    let classes = symmetry_classes(m);
    (0..m.atom_count())
        .filter(|&i| {
            let a = m.atom(i);
            if a.element != Element::C || a.is_aromatic || a.hydrogens > 1 {
                return false;
            }
            if m.total_connections(i) != 4
                || m.neighbors(i).iter().any(|&(_, bi)| m.bond(bi).order != BondOrder::Single)
            {
                return false;
            }
            let mut c: Vec<u32> = m.neighbors(i).iter().map(|&(nb, _)| classes[nb]).collect();
            c.sort_unstable();
            c.dedup();
            c.len() == m.degree(i)
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaBreakdown {
    pub fragment: f64,
    pub size_penalty: f64,
    pub stereo_penalty: f64,
    pub spiro_penalty: f64,
    pub bridge_penalty: f64,
    pub macrocycle_penalty: f64,
    pub density_correction: f64,
    pub score: f64,
}

pub fn sa_breakdown(m: &MolecularGraph, t: &FragmentScoreTable) -> Result<SaBreakdown, SaError> {
    if m.is_empty() {
        return Err(SaError::EmptyMolecule);
    }
    let envs = environment_counts(m, 2);
    let (mut sum, mut nf) = (0.0, 0u32);
    for &(id, c) in &envs {
        sum += t.contribution(id).unwrap_or(t.unknown) * c as f64;
        nf += c;
    }
    let fragment = sum / nf as f64;
    let n = m.atom_count() as f64;
    let rings = m.rings();
    let size_penalty = n.powf(1.005) - n;
    let stereo_penalty = ((stereo_center_count(m) + 1) as f64).log10();
    let spiro_penalty = ((rings.spiro_atoms().len() + 1) as f64).log10();
    let bridge_penalty = ((rings.bridgehead_atoms(m.bonds()).len() + 1) as f64).log10();
    let macrocycle_penalty = if rings.rings().iter().any(|r| r.len() > 8) { 2f64.log10() } else { 0.0 };
    let bits = envs.len() as f64;
    let density_correction = if n > bits { 0.5 * (n / bits).ln() } else { 0.0 };
    let raw = fragment - size_penalty - stereo_penalty - spiro_penalty - bridge_penalty - macrocycle_penalty
        + density_correction;
    let (lo, hi) = (-4.0, 2.5);
    let mut score = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
    if score > 8.0 {
        score = 8.0 + (score - 8.0).ln();
    }
    let score = score.clamp(1.0, 10.0);
    Ok(SaBreakdown {
        fragment,
        size_penalty,
        stereo_penalty,
        spiro_penalty,
        bridge_penalty,
        macrocycle_penalty,
        density_correction,
        score,
    })
}

/// Synthetic accessibility in [1, 10]; lower is easier.
pub fn sa_score(m: &MolecularGraph, t: &FragmentScoreTable) -> Result<f64, SaError> {
    sa_breakdown(m, t).map(|b| b.score)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let t = FragmentScoreTable::from_entries([(1, 0.5), (0xdead_beef, -1.25)], "unit", "2026-01-01");
        let back = FragmentScoreTable::from_text(&t.to_text()).unwrap();
        assert_eq!(back.contribution(0xdead_beef), Some(-1.25));
        assert_eq!(back.corpus_id, "unit");
        assert_eq!(back.date, "2026-01-01");
    }

    #[test]
    fn rejects_bad_rows() {
        let err = FragmentScoreTable::from_text(&format!("{FORMAT_HEADER}\nzz\t1.0\n")).unwrap_err();
        assert!(matches!(err, SaError::Format { line: 2, .. }));
        assert!(FragmentScoreTable::from_text("garbage").is_err());
    }

    #[test]
    fn stereo_centres() {
        let count = |s: &str| stereo_center_count(&parse_smiles(s).unwrap());
        assert_eq!(count("CC(O)CC"), 1);
        assert_eq!(count("CC(C)O"), 0);
        assert_eq!(count("CC1CCCCC1"), 0);
        assert_eq!(count("CC1CCCCC1C"), 2);
    }

    #[test]
    fn empty_molecule_rejected() {
        let t = FragmentScoreTable::from_entries([(1, 0.0)], "x", "y");
        let empty = MolecularGraph::from_parts(vec![], vec![], String::new()).unwrap();
        assert!(matches!(sa_score(&empty, &t), Err(SaError::EmptyMolecule)));
    }
}
