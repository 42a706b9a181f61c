//! Seeded synthetic drug-like corpora with a planted acrylamide warhead.
//!
//! Molecules are chains of one to three ring units joined by linkers, with
//! optional ring substituents and a terminal group. Planted molecules end in
//! an acrylamide; the rest end in a decoy (saturated amides, acrylates,
//! enones, vinyl and allyl groups) or nothing.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{canonicalize, has_substructure, parse_smiles, MolecularGraph};

/// Planted warhead motif (acrylamide).
pub const PLANTED_MOTIF: &str = "C=CC(=O)N";

#[derive(Debug, Clone, PartialEq)]
pub struct ToyMolecule {
    pub id: String,
    /// Canonical SMILES.
    pub smiles: String,
    pub has_motif: bool,
}

/// Ring units: `{d}` ring digit, `{s}` optional substituent branch, `{x}`
/// exit branch. The flag marks units whose exit atom is a nitrogen.
const UNITS: &[(&str, bool)] = &[
    ("c{d}c{s}cc({x})cc{d}", false),
    ("c{d}ccc({x})cc{d}{s}", false),
    ("c{d}c{s}nc({x})cc{d}", false),
    ("c{d}cnc({x})nc{d}", false),
    ("c{d}ccc({x})s{d}", false),
    ("c{d}ccc({x})o{d}", false),
    ("C{d}CC{s}C({x})CC{d}", false),
    ("C{d}CCN({x})CC{d}", true),
    ("N{d}CCN({x})CC{d}", true),
    ("C{d}CN({x})C{d}", true),
];

const TERMINAL_RINGS: &[&str] = &["N{d}CCOCC{d}", "c{d}ccccc{d}", "C{d}CC{d}", "c{d}ccncc{d}", "N{d}CCCC{d}"];

const SUBSTITUENTS: &[&str] = &["F", "Cl", "C", "OC", "C#N", "C(F)(F)F", "O", "N(C)C", "Br"];

const LINKERS: &[&str] = &["", "C", "CC", "O", "N", "C(=O)N", "NC(=O)", "S(=O)(=O)N", "OC", "C(=O)", "NC"];

const WARHEADS_ON_N: &[&str] = &["C(=O)C=C", "C(=O)C=CCN(C)C", "C(=O)C(C)=C"];
const WARHEADS_ON_C: &[&str] = &["NC(=O)C=C", "CNC(=O)C=C", "NC(=O)C=CCN(C)C", "N(C)C(=O)C=C"];

const DECOYS: &[&str] = &[
    "NC(=O)CC",
    "NC(=O)C",
    "OC(=O)C=C",
    "C(=O)C=C",
    "C=C",
    "CC=C",
    "C(=O)CC",
    "NC(=O)C#C",
    "C(=O)OC",
    "S(=O)(=O)C",
];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

fn fill(template: &str, digit: usize, sub: &str, exit: &str) -> String {
    let t = template.replace("{d}", &digit.to_string());
    let t = if sub.is_empty() { t.replace("{s}", "") } else { t.replace("{s}", &format!("({sub})")) };
    if exit.is_empty() {
        t.replace("({x})", "")
    } else {
        t.replace("{x}", exit)
    }
}

/// One random molecule; `planted` chooses an acrylamide terminal group.
fn build(rng: &mut ChaCha8Rng, planted: bool) -> String {
    let units = if rng.gen_bool(0.15) { 3 } else { rng.gen_range(1..=2) };
    let chosen: Vec<(&str, bool)> = (0..units).map(|_| UNITS[rng.gen_range(0..UNITS.len())]).collect();
    let last_on_n = chosen.last().expect("at least one unit").1;
    let terminal = if planted {
        pick(rng, if last_on_n { WARHEADS_ON_N } else { WARHEADS_ON_C }).to_string()
    } else if rng.gen_bool(0.7) {
        pick(rng, DECOYS).to_string()
    } else if rng.gen_bool(0.5) {
        fill(pick(rng, TERMINAL_RINGS), units + 1, "", "")
    } else {
        pick(rng, SUBSTITUENTS).to_string()
    };
    // Assemble from the tail inwards so each exit branch holds the rest.
    let mut rest = terminal;
    for (i, &(unit, _)) in chosen.iter().enumerate().rev() {
        let sub = if rng.gen_bool(0.35) { pick(rng, SUBSTITUENTS) } else { "" };
        let body = fill(unit, i + 1, sub, &rest);
        rest = if i == 0 {
            body
        } else {
            let linker = pick(rng, LINKERS);
            format!("{linker}{body}")
        };
    }
    if rng.gen_bool(0.3) {
        format!("{}{rest}", pick(rng, &["C", "CO", "N(C)", "FC", "CC"]))
    } else {
        rest
    }
}

pub fn planted_motif() -> MolecularGraph {
    parse_smiles(PLANTED_MOTIF).expect("motif parses")
}

/// `n` distinct canonical molecules, exactly `round(n * motif_fraction)` of
/// them carrying the planted motif, in seeded random order.
pub fn toy_corpus(n: usize, motif_fraction: f64, seed: u64) -> Vec<ToyMolecule> {
    let motif = planted_motif();
    let target = ((n as f64) * motif_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let (mut with, mut without) = (0, 0);
    while out.len() < n {
        let planted = with < target && (without >= n - target || rng.gen_bool(0.5));
        let smi = build(&mut rng, planted);
        let Ok(m) = parse_smiles(&smi) else { continue };
        let has = has_substructure(&motif, &m);
        if has != planted {
            continue;
        }
        let canon = canonicalize(&m);
        if !seen.insert(canon.clone()) {
            continue;
        }
        if has {
            with += 1;
        } else {
            without += 1;
        }
        out.push(ToyMolecule { id: String::new(), smiles: canon, has_motif: has });
    }
    out.shuffle(&mut rng);
    for (i, t) in out.iter_mut().enumerate() {
        t.id = format!("toy{:05}", i + 1);
    }
    out
}

/// Tab-separated corpus text: `SMILES\tid\tlabel`.
pub fn corpus_text(mols: &[ToyMolecule]) -> String {
    mols.iter().map(|t| format!("{}\t{}\t{}\n", t.smiles, t.id, u8::from(t.has_motif))).collect()
}
