//! Raw scores computed outside the engine (docking, 3D overlap), read from
//! `id,score` CSV files.

use std::collections::HashMap;
use std::path::Path;

use super::ScorerError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalScores {
    pub values: HashMap<String, f64>,
    /// Human-readable notes about duplicate ids.
    pub warnings: Vec<String>,
}

impl ExternalScores {
    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parses `id,score` rows. `#` lines are comments; a first row whose score
/// field is not numeric is taken as a header. Duplicate ids keep the last
/// value and record a warning.
pub fn parse_external_scores(text: &str) -> Result<ExternalScores, ScorerError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = ExternalScores::default();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| ScorerError::External {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(ScorerError::External {
                line,
                message: format!("expected 2 fields (id, score), found {}", record.len()),
            });
        }
        let (id, score) = (&record[0], &record[1]);
        let was_first = std::mem::replace(&mut first, false);
        let value: f64 = match score.parse() {
            Ok(v) => v,
            Err(_) if was_first => continue,
            Err(_) => {
                return Err(ScorerError::External {
                    line,
                    message: format!("score '{score}' is not a number"),
                })
            }
        };
        if !value.is_finite() {
            return Err(ScorerError::External { line, message: format!("score '{score}' is not finite") });
        }
        if id.is_empty() {
            return Err(ScorerError::External { line, message: "empty id".into() });
        }
        if let Some(old) = out.values.insert(id.to_string(), value) {
            let w = format!("line {line}: duplicate id '{id}' ({old} replaced by {value})");
            log::warn!("{w}");
            out.warnings.push(w);
        }
    }
    Ok(out)
}

pub fn ingest_external_scores(path: &Path) -> Result<ExternalScores, ScorerError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScorerError::Io(format!("{}: {e}", path.display())))?;
    parse_external_scores(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_empty_map() {
        assert!(parse_external_scores("").unwrap().is_empty());
    }

    #[test]
    fn single_row() {
        let s = parse_external_scores("m1,132.5\n").unwrap();
        assert_eq!(s.get("m1"), Some(132.5));
    }

    #[test]
    fn header_and_comments() {
        let s = parse_external_scores("# config abc\nid,score\nm1, -7.5\n\nm2,1e2\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("m1"), Some(-7.5));
        assert_eq!(s.get("m2"), Some(100.0));
    }

    #[test]
    fn duplicate_last_wins() {
        let s = parse_external_scores("m1,1\nm2,2\nm1,3\n").unwrap();
        assert_eq!(s.get("m1"), Some(3.0));
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("line 3"));
    }

    #[test]
    fn malformed_rows_report_line() {
        match parse_external_scores("m1,1\nm2,abc\n") {
            Err(ScorerError::External { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_external_scores("m1,1\nm2\n") {
            Err(ScorerError::External { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
