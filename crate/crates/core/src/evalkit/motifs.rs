//! Atypical warhead motif search over desirable structures.

use serde::Serialize;

use super::run::GenerationRun;
use crate::chem::{count_unique_matches, parse_smiles, MolecularGraph};

/// Built-in warhead motifs: allene, 3-oxo-beta-sultam, alpha-methylene-beta-lactone.
pub const BUILTIN_MOTIFS: [(&str, &str); 3] =
    [("allene", "C=C=C"), ("3-oxo-beta-sultam", "O=C1CS(=O)(=O)N1"), ("alpha-methylene-beta-lactone", "C=C1COC1=O")];

pub fn builtin_motifs() -> Vec<(String, MolecularGraph)> {
    BUILTIN_MOTIFS
        .iter()
        .map(|(n, s)| (n.to_string(), parse_smiles(s).expect("built-in motif parses")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifHit {
    pub id: String,
    pub smiles: String,
    /// Number of distinct matched atom sets.
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifHits {
    pub motif: String,
    pub hits: Vec<MotifHit>,
}

/// Desirable molecules containing each motif, in run order.
pub fn motif_search(run: &GenerationRun, motifs: &[(String, MolecularGraph)]) -> Vec<MotifHits> {
    let desirable: Vec<(&str, &str, MolecularGraph)> = run
        .records
        .iter()
        .filter(|r| r.desirable)
        .filter_map(|r| parse_smiles(&r.smiles).ok().map(|m| (r.id.as_str(), r.smiles.as_str(), m)))
        .collect();
    motifs
        .iter()
        .map(|(name, q)| MotifHits {
            motif: name.clone(),
            hits: desirable
                .iter()
                .filter_map(|(id, smi, m)| {
                    let n = count_unique_matches(q, m);
                    (n > 0).then(|| MotifHit { id: id.to_string(), smiles: smi.to_string(), matches: n })
                })
                .collect(),
        })
        .collect()
}

/// `motif,id,smiles,matches` rows.
pub fn motif_table(hits: &[MotifHits], config_hash: &str) -> String {
    let mut out = format!("# config_hash={config_hash}\nmotif,id,smiles,matches\n");
    for h in hits {
        for x in &h.hits {
            out.push_str(&format!("{},{},{},{}\n", h.motif, x.id, x.smiles, x.matches));
        }
    }
    out
}
