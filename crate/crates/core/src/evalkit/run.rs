//! Generation runs, rediscovery counting and generation-volume sweeps.

use std::collections::HashSet;

use serde::Serialize;

use super::EvalError;
use crate::chem::{canonicalize, parse_smiles, CorpusEntry};
use crate::scorers::ScoreVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub id: String,
    pub smiles: String,
    /// None when the SMILES does not parse.
    pub canonical: Option<String>,
    pub desirable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRun {
    pub run_id: String,
    pub preset: String,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunCounts {
    pub generated: usize,
    pub valid: usize,
    pub desirable: usize,
}

fn canonical_key(smiles: &str) -> Option<String> {
    parse_smiles(smiles).ok().filter(|m| !m.is_empty()).map(|m| canonicalize(&m))
}

impl GenerationRun {
    pub fn new(run_id: &str, preset: &str, records: Vec<RunRecord>) -> Self {
        GenerationRun { run_id: run_id.to_string(), preset: preset.to_string(), records }
    }

    pub fn from_scores(run_id: &str, preset: &str, vectors: &[ScoreVector]) -> Self {
        let records = vectors
            .iter()
            .map(|v| RunRecord {
                id: v.id.clone(),
                smiles: v.smiles.clone(),
                canonical: v.canonical.clone(),
                desirable: v.desirable && v.valid,
            })
            .collect();
        Self::new(run_id, preset, records)
    }

    /// Reads a run table: CSV with `#` comments and a header naming at least
    /// `smiles` and `desirable` columns (an `id` column is optional).
    pub fn parse_csv(run_id: &str, preset: &str, text: &str) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(false).from_reader(text.as_bytes());
        let err = |line: usize, message: String| EvalError::Run { line, message };
        let header = rdr.headers().map_err(|e| err(0, e.to_string()))?.clone();
        let col = |name: &str| header.iter().position(|h| h.trim() == name);
        let s_col = col("smiles").ok_or_else(|| err(1, "missing 'smiles' column".into()))?;
        let d_col = col("desirable").ok_or_else(|| err(1, "missing 'desirable' column".into()))?;
        let id_col = col("id");
        let mut records = Vec::new();
        for (k, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let line = row.position().map_or(k + 2, |p| p.line() as usize);
            let smiles = row.get(s_col).unwrap_or_default().trim().to_string();
            let desirable = match row.get(d_col).unwrap_or_default().trim().to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" | "" => false,
                other => return Err(err(line, format!("desirable flag '{other}' is not a boolean"))),
            };
            let id = id_col
                .and_then(|c| row.get(c))
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("row{}", k + 1));
            let canonical = canonical_key(&smiles);
            records.push(RunRecord { id, smiles, desirable: desirable && canonical.is_some(), canonical });
        }
        Ok(Self::new(run_id, preset, records))
    }

    pub fn counts(&self) -> RunCounts {
        RunCounts {
            generated: self.records.len(),
            valid: self.records.iter().filter(|r| r.canonical.is_some()).count(),
            desirable: self.records.iter().filter(|r| r.desirable).count(),
        }
    }

    /// Run restricted to its first `n` records.
    pub fn prefix(&self, n: usize) -> GenerationRun {
        GenerationRun::new(&self.run_id, &self.preset, self.records[..n.min(self.records.len())].to_vec())
    }
}

/// Canonical keys of a reference corpus; unparsable lines are skipped.
pub fn reference_keys(entries: &[CorpusEntry]) -> (HashSet<String>, usize) {
    let mut keys = HashSet::new();
    let mut skipped = 0;
    for e in entries {
        match canonical_key(&e.smiles) {
            Some(k) => {
                keys.insert(k);
            }
            None => skipped += 1,
        }
    }
    (keys, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rediscovery {
    pub counts: RunCounts,
    /// Distinct desirable canonical keys present in the reference set.
    pub rediscovered: usize,
    /// `100 * rediscovered / desirable`; None when nothing is desirable.
    pub rate_percent: Option<f64>,
}

pub fn rediscovery_rate(run: &GenerationRun, reference: &HashSet<String>) -> Rediscovery {
    let counts = run.counts();
    let hits: HashSet<&str> = run
        .records
        .iter()
        .filter(|r| r.desirable)
        .filter_map(|r| r.canonical.as_deref())
        .filter(|k| reference.contains(*k))
        .collect();
    let rediscovered = hits.len();
    let rate_percent = (counts.desirable > 0).then(|| 100.0 * rediscovered as f64 / counts.desirable as f64);
    Rediscovery { counts, rediscovered, rate_percent }
}

pub fn format_rate(rate: Option<f64>) -> String {
    rate.map_or_else(|| "n/a".to_string(), |r| format!("{r:.2}"))
}

/// Rediscovery table: `model,generated,valid,desirable_structures,rediscovered,rate_percent`.
pub fn rediscovery_table(rows: &[(String, Rediscovery)], config_hash: &str) -> String {
    let mut out = format!("# config_hash={config_hash}\nmodel,generated,valid,desirable_structures,rediscovered,rate_percent\n");
    for (model, r) in rows {
        out.push_str(&format!(
            "{model},{},{},{},{},{}\n",
            r.counts.generated,
            r.counts.valid,
            r.counts.desirable,
            r.rediscovered,
            format_rate(r.rate_percent)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scale: usize,
    pub rediscovery: Rediscovery,
}

/// Rediscovery over nested prefixes of one run, one row per scale.
pub fn volume_sweep(run: &GenerationRun, scales: &[usize], reference: &HashSet<String>) -> Result<Vec<SweepRow>, EvalError> {
    if scales.is_empty() {
        return Err(EvalError::Scales("no scales given".into()));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::Scales("scales must be strictly ascending".into()));
    }
    let last = *scales.last().expect("non-empty");
    if last > run.records.len() {
        return Err(EvalError::Scales(format!("scale {last} exceeds the {} generated molecules", run.records.len())));
    }
    Ok(scales
        .iter()
        .map(|&scale| SweepRow { scale, rediscovery: rediscovery_rate(&run.prefix(scale), reference) })
        .collect())
}

pub fn sweep_table(rows: &[SweepRow], config_hash: &str) -> String {
    let mut out = format!("# config_hash={config_hash}\nscale,valid,desirable_structures,rediscovered,rate_percent\n");
    for r in rows {
        let d = &r.rediscovery;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scale,
            d.counts.valid,
            d.counts.desirable,
            d.rediscovered,
            format_rate(d.rate_percent)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, smiles: &str, desirable: bool) -> RunRecord {
        RunRecord { id: id.into(), smiles: smiles.into(), canonical: canonical_key(smiles), desirable }
    }

    #[test]
    fn duplicates_count_once() {
        let run = GenerationRun::new(
            "r",
            "egfr-3",
            vec![record("a", "CCO", true), record("b", "OCC", true), record("c", "CCN", true), record("d", "CCCl", false)],
        );
        let reference: HashSet<String> = ["CCO", "CCCl"].iter().map(|s| canonical_key(s).unwrap()).collect();
        let r = rediscovery_rate(&run, &reference);
        assert_eq!(r.rediscovered, 1);
        assert_eq!(r.counts, RunCounts { generated: 4, valid: 4, desirable: 3 });
        assert!((r.rate_percent.unwrap() - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn nothing_desirable_is_not_applicable() {
        let run = GenerationRun::new("r", "p", vec![record("a", "CCO", false)]);
        let r = rediscovery_rate(&run, &HashSet::new());
        assert_eq!(r.rate_percent, None);
        assert_eq!(format_rate(r.rate_percent), "n/a");
    }

    #[test]
    fn parses_score_tables() {
        let text = "# config_hash=x\nid,smiles,qed_raw,qed_clipped,desirable\nm1,CCO,0.4,0.4,true\nm2,C1CC,,0,false\n";
        let run = GenerationRun::parse_csv("r", "p", text).unwrap();
        assert_eq!(run.counts(), RunCounts { generated: 2, valid: 1, desirable: 1 });
        assert!(GenerationRun::parse_csv("r", "p", "id,smiles\na,C\n").is_err());
    }
}
