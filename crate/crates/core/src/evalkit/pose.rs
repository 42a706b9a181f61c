//! Ingested ligand poses and warhead-to-residue distances.

use serde::Serialize;

use super::EvalError;
use crate::chem::MolecularGraph;
use crate::neural::AttributionMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseFile {
    pub molecule_id: String,
    pub residue: String,
    pub anchor: [f64; 3],
    /// Heavy-atom coordinates in canonical atom order (A).
    pub coords: Vec<[f64; 3]>,
}

fn parse_xyz(fields: &[&str], line: usize) -> Result<[f64; 3], EvalError> {
    let mut out = [0.0; 3];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| EvalError::Pose { line, message: format!("'{f}' is not a finite coordinate") })?;
    }
    Ok(out)
}

impl PoseFile {
    /// Header `molecule_id residue x y z`, then one `index x y z` line per
    /// heavy atom; indices must cover 0..n exactly once. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(EvalError::Pose { line: 0, message: "empty pose file".into() })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 {
            return Err(EvalError::Pose { line: hl, message: "header must be: molecule_id residue x y z".into() });
        }
        let anchor = parse_xyz(&h[2..], hl)?;
        let mut atoms: Vec<(usize, [f64; 3], usize)> = Vec::new();
        for (ln, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(EvalError::Pose { line: ln, message: "atom lines must be: index x y z".into() });
            }
            let idx = f[0]
                .parse::<usize>()
                .map_err(|_| EvalError::Pose { line: ln, message: format!("bad atom index '{}'", f[0]) })?;
            atoms.push((idx, parse_xyz(&f[1..], ln)?, ln));
        }
        atoms.sort_by_key(|a| a.0);
        for (k, (idx, _, ln)) in atoms.iter().enumerate() {
            if *idx != k {
                return Err(EvalError::Pose { line: *ln, message: format!("atom indices must be 0..{} without gaps or repeats", atoms.len()) });
            }
        }
        Ok(PoseFile {
            molecule_id: h[0].to_string(),
            residue: h[1].to_string(),
            anchor,
            coords: atoms.into_iter().map(|a| a.1).collect(),
        })
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Minimum distance from any tagged atom to the residue anchor.
pub fn warhead_distance(m: &MolecularGraph, att: &AttributionMap, pose: &PoseFile) -> Result<f64, EvalError> {
    if pose.coords.len() != m.atom_count() {
        return Err(EvalError::AtomCountMismatch { pose: pose.coords.len(), molecule: m.atom_count() });
    }
    if att.tagged.is_empty() {
        return Err(EvalError::NoWarhead);
    }
    att.tagged
        .iter()
        .map(|&i| pose.coords.get(i).map(|&c| dist(c, pose.anchor)).ok_or(EvalError::AtomCountMismatch {
            pose: pose.coords.len(),
            molecule: i + 1,
        }))
        .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d)))
}
