//! Whole-molecule properties used by QED and the scorers.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::crippen::crippen_logp;
use crate::chem::{has_substructure, parse_smiles, substructure_match, BondOrder, Element, MolecularGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    pub mw: f64,
    pub logp: f64,
    pub hba: u32,
    pub hbd: u32,
    pub psa: f64,
    pub rotb: u32,
    pub arom: u32,
    pub alerts: u32,
}

pub fn compute_properties(m: &MolecularGraph) -> PropertyVector {
    PropertyVector {
        mw: molecular_weight(m),
        logp: crippen_logp(m),
        hba: h_bond_acceptors(m),
        hbd: h_bond_donors(m),
        psa: tpsa(m),
        rotb: rotatable_bonds(m),
        arom: aromatic_rings(m),
        alerts: alert_count(m),
    }
}

/// Average molecular weight including implicit hydrogens.
pub fn molecular_weight(m: &MolecularGraph) -> f64 {
    m.atoms()
        .iter()
        .map(|a| a.element.mass() + a.hydrogens as f64 * Element::H.mass())
        .sum()
}

struct BondTally {
    single: u32,
    double: u32,
    triple: u32,
    aromatic: u32,
}

fn tally(m: &MolecularGraph, i: usize) -> BondTally {
    let mut t = BondTally { single: 0, double: 0, triple: 0, aromatic: 0 };
    for &(_, bi) in m.neighbors(i) {
        match m.bond(bi).order {
            BondOrder::Single => t.single += 1,
            BondOrder::Double => t.double += 1,
            BondOrder::Triple => t.triple += 1,
            BondOrder::Aromatic => t.aromatic += 1,
        }
    }
    t
}

/// Topological polar surface area from N and O fragment contributions.
pub fn tpsa(m: &MolecularGraph) -> f64 {
    (0..m.atom_count()).map(|i| tpsa_contribution(m, i)).sum()
}

fn tpsa_contribution(m: &MolecularGraph, i: usize) -> f64 {
    let a = m.atom(i);
    let h = a.hydrogens as u32;
    let q = a.formal_charge;
    let nb = m.degree(i);
    let in3 = m.rings().atom_in_ring_of_size(i, 3);
    let t = tally(m, i);
    let (s, d, tr, ar) = (t.single, t.double, t.triple, t.aromatic);
    let v = match a.element {
        Element::N => {
            let v = match (nb, h, q) {
                (1, 0, 0) if tr == 1 => Some(23.79),
                (1, 1, 0) if d == 1 => Some(23.85),
                (1, 2, 0) if s == 1 => Some(26.02),
                (1, 2, 1) if d == 1 => Some(25.59),
                (1, 3, 1) if s == 1 => Some(27.64),
                (2, 0, 0) if s == 1 && d == 1 => Some(12.36),
                (2, 0, 0) if tr == 1 && d == 1 => Some(13.60),
                (2, 1, 0) if s == 2 => Some(if in3 { 21.94 } else { 12.03 }),
                (2, 0, 1) if tr == 1 && s == 1 => Some(4.36),
                (2, 1, 1) if d == 1 && s == 1 => Some(13.97),
                (2, 2, 1) if s == 2 => Some(16.61),
                (2, 0, 0) if ar == 2 => Some(12.89),
                (2, 1, 0) if ar == 2 => Some(15.79),
                (2, 1, 1) if ar == 2 => Some(14.14),
                (3, 0, 0) if s == 3 => Some(if in3 { 3.01 } else { 3.24 }),
                (3, 0, 0) if s == 1 && d == 2 => Some(11.68),
                (3, 0, 1) if s == 2 && d == 1 => Some(3.01),
                (3, 1, 1) if s == 3 => Some(4.44),
                (3, 0, 0) if ar == 3 => Some(4.41),
                (3, 0, 0) if s == 1 && ar == 2 => Some(4.93),
                (3, 0, 0) if d == 1 && ar == 2 => Some(8.39),
                (3, 0, 1) if ar == 3 => Some(4.10),
                (3, 0, 1) if s == 1 && ar == 2 => Some(3.88),
                (4, 0, 1) if s == 4 => Some(0.0),
                _ => None,
            };
            v.unwrap_or(30.5 - nb as f64 * 8.2 + h as f64 * 1.5)
        }
        Element::O => {
            let v = match (nb, h, q) {
                (1, 0, 0) if d == 1 => Some(17.07),
                (1, 1, 0) if s == 1 => Some(20.23),
                (1, 0, -1) if s == 1 => Some(23.06),
                (2, 0, 0) if s == 2 => Some(if in3 { 12.53 } else { 9.23 }),
                (2, 0, 0) if ar == 2 => Some(13.14),
                _ => None,
            };
            v.unwrap_or(28.5 - nb as f64 * 8.6 + h as f64 * 1.5)
        }
        _ => 0.0,
    };
    v.max(0.0)
}

/// Heavy-atom neighbours' valence; `v` in the usual pattern language.
fn valence(m: &MolecularGraph, i: usize) -> u32 {
    m.total_valence(i)
}

/// Acceptors: aromatic O and N without H, ether/hydroxyl/carbonyl oxygens,
/// thioethers and thiocarbonyls, anionic O/S, nitrile N, and neutral
/// trivalent N that is not part of an amide or sulfonamide.
pub fn h_bond_acceptors(m: &MolecularGraph) -> u32 {
    let mut n = 0;
    for i in 0..m.atom_count() {
        let a = m.atom(i);
        let x = m.total_connections(i);
        let v = valence(m, i);
        let h = a.hydrogens;
        let q = a.formal_charge;
        let hit = match a.element {
            Element::O if a.is_aromatic => h == 0 && x == 2,
            Element::O => (x == 2 && v == 2 && h <= 1) || (x == 1 && h == 0 && v == 2) || (q == -1 && x == 1),
            Element::S if !a.is_aromatic => (h == 0 && v == 2 && (x == 2 || x == 1)) || (q == -1 && x == 1),
            Element::N if a.is_aromatic => h == 0 && x == 2,
            Element::N => {
                (h == 0 && x == 1 && v == 3)
                    || (q == 0 && x == 3 && v == 3 && !is_amide_like_nitrogen(m, i))
            }
            _ => false,
        };
        n += hit as u32;
    }
    n
}

/// `N[C,S]=O`: nitrogen bonded to a carbon or sulfur carrying a double-bonded O.
fn is_amide_like_nitrogen(m: &MolecularGraph, i: usize) -> bool {
    m.neighbors(i).iter().any(|&(nb, bi)| {
        let e = m.atom(nb).element;
        let order = m.bond(bi).order;
        matches!(order, BondOrder::Single | BondOrder::Aromatic)
            && (e == Element::C || e == Element::S)
            && m.neighbors(nb).iter().any(|&(o, obi)| {
                o != i && m.atom(o).element == Element::O && !m.atom(o).is_aromatic && m.bond(obi).order == BondOrder::Double
            })
    })
}

/// Donors: N-H (neutral trivalent or cationic tetravalent), neutral O-H,
/// neutral S-H, and aromatic n-H.
pub fn h_bond_donors(m: &MolecularGraph) -> u32 {
    let mut n = 0;
    for i in 0..m.atom_count() {
        let a = m.atom(i);
        if a.hydrogens == 0 {
            continue;
        }
        let v = valence(m, i);
        let q = a.formal_charge;
        let hit = match a.element {
            Element::N if a.is_aromatic => q == 0,
            Element::N => v == 3 || (q == 1 && v == 4),
            Element::O | Element::S => q == 0 && a.hydrogens == 1,
            _ => false,
        };
        n += hit as u32;
    }
    n
}

fn has_triple(m: &MolecularGraph, i: usize) -> bool {
    m.neighbors(i).iter().any(|&(_, bi)| m.bond(bi).order == BondOrder::Triple)
}

/// CX3 with three identical halogens, or a carbon bearing three methyls.
fn is_bulky_terminus(m: &MolecularGraph, i: usize) -> bool {
    let a = m.atom(i);
    if a.element != Element::C || a.is_aromatic {
        return false;
    }
    for hal in [Element::F, Element::CL, Element::BR] {
        if m.neighbors(i).iter().filter(|&&(nb, _)| m.atom(nb).element == hal).count() == 3 {
            return true;
        }
    }
    m.neighbors(i)
        .iter()
        .filter(|&&(nb, bi)| {
            let b = m.atom(nb);
            b.element == Element::C
                && !b.is_aromatic
                && b.hydrogens == 3
                && m.bond(bi).order == BondOrder::Single
        })
        .count()
        == 3
}

/// Trigonal carbon double-bonded to N, O or S.
fn is_acyl_like_carbon(m: &MolecularGraph, i: usize) -> bool {
    let a = m.atom(i);
    a.element == Element::C
        && !a.is_aromatic
        && m.degree(i) == 3
        && m.neighbors(i).iter().any(|&(nb, bi)| {
            m.bond(bi).order == BondOrder::Double
                && matches!(m.atom(nb).element, Element::N | Element::O | Element::S)
        })
}

/// Non-ring single bonds between non-terminal atoms, excluding bonds to
/// triple-bonded atoms, bonds to CX3 / tert-butyl centres, and the C-N,
/// C-O or C-S bond of amides, esters and their thio analogues.
pub fn rotatable_bonds(m: &MolecularGraph) -> u32 {
    let mut n = 0;
    for (bi, b) in m.bonds().iter().enumerate() {
        if b.order != BondOrder::Single || m.rings().bond_in_ring(bi) {
            continue;
        }
        let (u, v) = (b.begin, b.end);
        if m.degree(u) < 2 || m.degree(v) < 2 {
            continue;
        }
        if has_triple(m, u) || has_triple(m, v) {
            continue;
        }
        if is_bulky_terminus(m, u) || is_bulky_terminus(m, v) {
            continue;
        }
        let amide = |c: usize, x: usize| {
            is_acyl_like_carbon(m, c) && matches!(m.atom(x).element, Element::N | Element::O | Element::S)
        };
        if amide(u, v) || amide(v, u) {
            continue;
        }
        n += 1;
    }
    n
}

/// Smallest-set rings made only of aromatic atoms.
pub fn aromatic_rings(m: &MolecularGraph) -> u32 {
    m.rings()
        .rings()
        .iter()
        .filter(|r| r.iter().all(|&a| m.atom(a).is_aromatic))
        .count() as u32
}

#[derive(Clone, Copy)]
enum Constraint {
    /// Query atom must carry at least this many hydrogens.
    MinH(usize, u8),
    /// Bond between two query atoms must not be a ring bond.
    Acyclic(usize, usize),
}

struct Alert {
    name: &'static str,
    /// Any matching variant raises the alert.
    variants: Vec<MolecularGraph>,
    constraints: &'static [Constraint],
}

const ALERT_DEFS: &[(&str, &[&str], &[Constraint])] = &[
    ("three_membered_heterocycle", &["C1OC1", "C1NC1", "C1SC1"], &[]),
    ("acyl_halide", &["C(=O)Cl", "C(=O)Br", "C(=O)F"], &[]),
    ("alkyl_halide", &["CBr", "CI"], &[]),
    ("aldehyde", &["C=O"], &[Constraint::MinH(0, 1)]),
    ("peroxide", &["OO"], &[]),
    ("disulfide", &["SS"], &[]),
    ("hydrazine", &["NN"], &[]),
    ("azo", &["N=N"], &[]),
    ("dicarbonyl", &["O=CC=O"], &[]),
    ("michael_acceptor", &["C=CC=O"], &[Constraint::Acyclic(0, 1)]),
    (
        "ester",
        &["CC(=O)OC", "CC(=O)Oc", "cC(=O)OC", "cC(=O)Oc", "OC(=O)OC", "OC(=O)Oc", "SC(=O)OC", "SC(=O)Oc"],
        &[],
    ),
    ("acyclic_imine", &["C=N"], &[Constraint::Acyclic(0, 1)]),
    ("primary_aniline", &["Nc1ccccc1"], &[Constraint::MinH(0, 2)]),
];

fn alerts() -> &'static [Alert] {
    static ALERTS: OnceLock<Vec<Alert>> = OnceLock::new();
    ALERTS.get_or_init(|| {
        ALERT_DEFS
            .iter()
            .map(|&(name, variants, constraints)| Alert {
                name,
                variants: variants.iter().map(|s| alert_query(s)).collect(),
                constraints,
            })
            .collect()
    })
}

/// Parses an alert pattern. Patterns that are not valid SMILES on their own
/// may use a lowercase `c` for an aromatic carbon outside any pattern ring.
fn alert_query(pattern: &str) -> MolecularGraph {
    if let Ok(m) = parse_smiles(pattern) {
        return m;
    }
    let mut aromatic = Vec::new();
    let mut atom = 0;
    let mut prev = ' ';
    for ch in pattern.chars() {
        let continuation = (prev == 'C' && ch == 'l') || (prev == 'B' && ch == 'r');
        if ch.is_ascii_alphabetic() && !continuation {
            if ch == 'c' {
                aromatic.push(atom);
            }
            atom += 1;
        }
        prev = ch;
    }
    let m = parse_smiles(&pattern.replace('c', "C")).expect("built-in alert parses");
    let mut atoms = m.atoms().to_vec();
    for i in aromatic {
        atoms[i].is_aromatic = true;
    }
    MolecularGraph::from_parts(atoms, m.bonds().to_vec(), pattern).expect("alert graph is valid")
}

fn satisfies(m: &MolecularGraph, map: &[usize], constraints: &[Constraint]) -> bool {
    constraints.iter().all(|c| match *c {
        Constraint::MinH(q, h) => m.atom(map[q]).hydrogens >= h,
        Constraint::Acyclic(a, b) => {
            m.neighbors(map[a])
                .iter()
                .find(|&&(nb, _)| nb == map[b])
                .is_some_and(|&(_, bi)| !m.rings().bond_in_ring(bi))
        }
    })
}

/// Names of the built-in structural alerts present in `m`.
pub fn matched_alerts(m: &MolecularGraph) -> Vec<&'static str> {
    alerts()
        .iter()
        .filter(|a| {
            a.variants.iter().any(|q| {
                if a.constraints.is_empty() {
                    has_substructure(q, m)
                } else {
                    substructure_match(q, m).iter().any(|map| satisfies(m, map, a.constraints))
                }
            })
        })
        .map(|a| a.name)
        .collect()
}

pub fn alert_count(m: &MolecularGraph) -> u32 {
    matched_alerts(m).len() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(s: &str) -> PropertyVector {
        compute_properties(&parse_smiles(s).unwrap())
    }

    #[test]
    fn methane() {
        let p = props("C");
        assert!((p.mw - 16.043).abs() < 0.01);
        assert_eq!((p.hba, p.hbd), (0, 0));
    }

    #[test]
    fn ethanol() {
        let p = props("CCO");
        assert_eq!((p.hba, p.hbd), (1, 1));
        assert!((p.psa - 20.23).abs() < 1e-9);
    }

    #[test]
    fn rotatable_rules() {
        for (s, n) in [
            ("CC(=O)Oc1ccccc1", 1),
            ("CC(=O)OC", 0),
            ("CC(=O)NCC", 1),
            ("CCC(F)(F)F", 0),
            ("CCC(C)(C)C", 0),
            ("CCCC", 1),
            ("c1ccccc1-c1ccccc1", 1),
            ("CCNC(=O)NCC", 2),
            ("C=CC(=O)Nc1ccccc1", 2),
            ("CCS(=O)(=O)NC", 2),
        ] {
            assert_eq!(props(s).rotb, n, "{s}");
        }
    }

    #[test]
    fn aromatic_ring_count() {
        assert_eq!(props("c1ccc2ccccc2c1").arom, 2);
        assert_eq!(props("C1CCc2ccccc2C1").arom, 1);
    }

    #[test]
    fn alerts_found() {
        assert_eq!(matched_alerts(&parse_smiles("CC=O").unwrap()), vec!["aldehyde"]);
        assert!(matched_alerts(&parse_smiles("CC(C)=O").unwrap()).is_empty());
        assert!(matched_alerts(&parse_smiles("C=CC(=O)Nc1ccccc1").unwrap()).contains(&"michael_acceptor"));
    }

    #[test]
    fn mw_additive_over_components() {
        let a = props("CCO").mw;
        let b = props("c1ccccc1").mw;
        assert!((props("CCO.c1ccccc1").mw - (a + b)).abs() < 1e-9);
    }
}
