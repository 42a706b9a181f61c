//! Line-oriented SMILES corpus files: `SMILES[\tid[\tlabel]]`, blank lines and
//! `#` comments ignored.

use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    /// 1-based source line.
    pub line: usize,
    pub smiles: String,
    pub id: String,
    pub label: Option<String>,
}

pub fn parse_corpus(text: &str) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t').map(str::trim);
        let smiles = fields.next().unwrap_or_default().to_string();
        let id = fields
            .next()
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .unwrap_or_else(|| format!("mol{}", out.len() + 1));
        let label = fields.next().filter(|s| !s.is_empty()).map(str::to_string);
        out.push(CorpusEntry {
            line: i + 1,
            smiles,
            id,
            label,
        });
    }
    out
}

pub fn read_corpus(path: &Path) -> io::Result<Vec<CorpusEntry>> {
    Ok(parse_corpus(&fs::read_to_string(path)?))
}
