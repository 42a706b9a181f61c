//! SMILES reader.
//!
//! Supported: organic-subset and bracket atoms (isotope, chirality, H count,
//! charge, atom class), branches, ring closures including `%nn`, bond symbols
//! `- = # : / \`, and dot-disconnected components. Lowercase ring atoms are
//! accepted only when the ring system admits a Kekulé structure.

use std::collections::BTreeMap;

use super::element::Element;
use super::graph::{Atom, Bond, BondDirection, BondOrder, Chirality, MolecularGraph};
use super::rings::RingInfo;
use super::ChemError;

#[derive(Debug, Clone, Copy, PartialEq)]
struct BondSpec {
    order: BondOrder,
    direction: Option<BondDirection>,
}

#[derive(Debug, Clone)]
struct RawAtom {
    atom: Atom,
    bracket: bool,
}

#[derive(Debug, Clone)]
struct RawBond {
    begin: usize,
    end: usize,
    spec: Option<BondSpec>,
}

struct Reader<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
}

/// Parses a SMILES string into a validated molecular graph.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph, ChemError> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Err(ChemError::Empty);
    }
    let mut reader = Reader {
        text: trimmed.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    reader.read()?;
    finish(reader.atoms, reader.bonds, trimmed)
}

/// True iff `s` parses into a valid molecule.
pub fn validity_check(s: &str) -> bool {
    parse_smiles(s).is_ok()
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn syntax(&self, message: impl Into<String>) -> ChemError {
        ChemError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn read(&mut self) -> Result<(), ChemError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<BondSpec> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut open_rings: BTreeMap<u32, (usize, Option<BondSpec>, usize)> = BTreeMap::new();
        // Set right after '(' to reject empty branches.
        let mut branch_open_empty = false;

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(ChemError::UnbalancedParenthesis { position: self.pos });
                    };
                    if pending.is_some() {
                        return Err(self.syntax("bond symbol before branch"));
                    }
                    branches.push((p, self.pos));
                    self.pos += 1;
                    branch_open_empty = true;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(ChemError::UnbalancedParenthesis { position: self.pos });
                    };
                    if branch_open_empty {
                        return Err(self.syntax("empty branch"));
                    }
                    if pending.is_some() {
                        return Err(self.syntax("dangling bond at end of branch"));
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(self.syntax("consecutive bond symbols"));
                    }
                    if prev.is_none() {
                        return Err(self.syntax("bond symbol without a preceding atom"));
                    }
                    pending = Some(match c {
                        b'-' => BondSpec { order: BondOrder::Single, direction: None },
                        b'=' => BondSpec { order: BondOrder::Double, direction: None },
                        b'#' => BondSpec { order: BondOrder::Triple, direction: None },
                        b':' => BondSpec { order: BondOrder::Aromatic, direction: None },
                        b'/' => BondSpec { order: BondOrder::Single, direction: Some(BondDirection::Up) },
                        _ => BondSpec { order: BondOrder::Single, direction: Some(BondDirection::Down) },
                    });
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.syntax("bond symbol before '.'"));
                    }
                    if prev.is_none() {
                        return Err(self.syntax("'.' without a preceding atom"));
                    }
                    if branch_open_empty {
                        return Err(self.syntax("empty branch"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let start = self.pos;
                    let label = self.ring_label()?;
                    let Some(p) = prev else {
                        return Err(ChemError::RingClosure {
                            position: start,
                            message: "ring closure without a preceding atom".into(),
                        });
                    };
                    if let Some((other, spec, _)) = open_rings.remove(&label) {
                        let spec = match (spec, pending) {
                            (Some(a), Some(b)) if a.order != b.order => {
                                return Err(ChemError::RingClosure {
                                    position: start,
                                    message: format!("conflicting bond orders on ring closure {label}"),
                                });
                            }
                            (Some(a), _) => Some(a),
                            (None, b) => b,
                        };
                        if other == p {
                            return Err(ChemError::RingClosure {
                                position: start,
                                message: format!("ring closure {label} bonds an atom to itself"),
                            });
                        }
                        if self.has_bond(other, p) {
                            return Err(ChemError::RingClosure {
                                position: start,
                                message: format!("ring closure {label} duplicates an existing bond"),
                            });
                        }
                        self.bonds.push(RawBond { begin: other, end: p, spec });
                    } else {
                        open_rings.insert(label, (p, pending, start));
                    }
                    pending = None;
                }
                _ => {
                    let idx = self.read_atom()?;
                    if let Some(p) = prev {
                        self.bonds.push(RawBond { begin: p, end: idx, spec: pending });
                    } else if pending.is_some() {
                        return Err(self.syntax("bond symbol without a preceding atom"));
                    }
                    pending = None;
                    prev = Some(idx);
                    branch_open_empty = false;
                }
            }
        }
        if let Some(&(_, position)) = branches.last() {
            return Err(ChemError::UnbalancedParenthesis { position });
        }
        if let Some((&label, &(_, _, position))) = open_rings.iter().next() {
            return Err(ChemError::RingClosure {
                position,
                message: format!("ring closure {label} is never closed"),
            });
        }
        if pending.is_some() {
            return Err(self.syntax("dangling bond at end of input"));
        }
        Ok(())
    }

    fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|bd| (bd.begin == a && bd.end == b) || (bd.begin == b && bd.end == a))
    }

    fn ring_label(&mut self) -> Result<u32, ChemError> {
        let c = self.peek().expect("caller checked");
        if c == b'%' {
            let d = self.text.get(self.pos + 1..self.pos + 3);
            match d {
                Some(&[a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as u32)
                }
                _ => Err(ChemError::RingClosure {
                    position: self.pos,
                    message: "'%' must be followed by two digits".into(),
                }),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn read_atom(&mut self) -> Result<usize, ChemError> {
        let start = self.pos;
        let c = self.peek().expect("caller checked");
        let raw = if c == b'[' {
            self.read_bracket_atom()?
        } else {
            let (element, aromatic, len) = organic_symbol(&self.text[self.pos..]).ok_or_else(|| {
                let symbol = String::from_utf8_lossy(&self.text[start..start + 1]).into_owned();
                ChemError::UnknownSymbol { symbol, position: start }
            })?;
            self.pos += len;
            let mut atom = Atom::new(element);
            atom.is_aromatic = aromatic;
            RawAtom { atom, bracket: false }
        };
        self.atoms.push(raw);
        Ok(self.atoms.len() - 1)
    }

    fn read_bracket_atom(&mut self) -> Result<RawAtom, ChemError> {
        let open = self.pos;
        self.pos += 1;
        let close = self.text[self.pos..]
            .iter()
            .position(|&b| b == b']')
            .map(|p| p + self.pos)
            .ok_or(ChemError::Syntax {
                position: open,
                message: "unterminated bracket atom".into(),
            })?;
        let body = &self.text[self.pos..close];
        let mut i = 0;
        let mut isotope: Option<u16> = None;
        while i < body.len() && body[i].is_ascii_digit() {
            let v = isotope.unwrap_or(0) as u32 * 10 + (body[i] - b'0') as u32;
            isotope = Some(v.min(u16::MAX as u32) as u16);
            i += 1;
        }
        let sym_start = i;
        let (element, aromatic) = {
            let rest = &body[i..];
            let two = rest.get(..2).map(|s| String::from_utf8_lossy(s).into_owned());
            let one = rest.get(..1).map(|s| String::from_utf8_lossy(s).into_owned());
            let aromatic2 = ["se", "as", "te"];
            if let Some(t) = two.as_deref().filter(|t| aromatic2.contains(t)) {
                i += 2;
                (Element::from_symbol(&capitalize(t)).expect("table has aromatic symbols"), true)
            } else if let Some(e) = two
                .as_deref()
                .filter(|t| t.as_bytes()[0].is_ascii_uppercase())
                .and_then(Element::from_symbol)
            {
                i += 2;
                (e, false)
            } else if let Some(t) = one.as_deref() {
                let b = t.as_bytes()[0];
                if b.is_ascii_uppercase() {
                    let e = Element::from_symbol(t).ok_or_else(|| ChemError::UnknownSymbol {
                        symbol: t.to_string(),
                        position: self.pos + sym_start,
                    })?;
                    i += 1;
                    (e, false)
                } else if matches!(b, b'b' | b'c' | b'n' | b'o' | b'p' | b's') {
                    i += 1;
                    (Element::from_symbol(&capitalize(t)).expect("organic symbol"), true)
                } else {
                    return Err(ChemError::UnknownSymbol {
                        symbol: t.to_string(),
                        position: self.pos + sym_start,
                    });
                }
            } else {
                return Err(ChemError::Syntax {
                    position: open,
                    message: "empty bracket atom".into(),
                });
            }
        };
        let mut atom = Atom::new(element);
        atom.is_aromatic = aromatic;
        atom.isotope = isotope;
        if body.get(i) == Some(&b'@') {
            if body.get(i + 1) == Some(&b'@') {
                atom.chirality = Some(Chirality::Clockwise);
                i += 2;
            } else {
                atom.chirality = Some(Chirality::CounterClockwise);
                i += 1;
            }
        }
        if body.get(i) == Some(&b'H') {
            i += 1;
            let mut h = 1u32;
            if let Some(d) = body.get(i).filter(|d| d.is_ascii_digit()) {
                h = (d - b'0') as u32;
                i += 1;
            }
            atom.hydrogens = h as u8;
        }
        if let Some(&sign) = body.get(i).filter(|&&b| b == b'+' || b == b'-') {
            let unit: i32 = if sign == b'+' { 1 } else { -1 };
            i += 1;
            let mut magnitude = 1i32;
            if let Some(d) = body.get(i).filter(|d| d.is_ascii_digit()) {
                magnitude = (d - b'0') as i32;
                i += 1;
            } else {
                while body.get(i) == Some(&sign) {
                    magnitude += 1;
                    i += 1;
                }
            }
            atom.formal_charge = (unit * magnitude) as i8;
        }
        if body.get(i) == Some(&b':') {
            i += 1;
            let s = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if s == i {
                return Err(ChemError::Syntax {
                    position: self.pos + i,
                    message: "atom class without digits".into(),
                });
            }
        }
        if i != body.len() {
            return Err(ChemError::Syntax {
                position: self.pos + i,
                message: format!(
                    "unexpected '{}' in bracket atom",
                    String::from_utf8_lossy(&body[i..i + 1])
                ),
            });
        }
        self.pos = close + 1;
        Ok(RawAtom { atom, bracket: true })
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn organic_symbol(rest: &[u8]) -> Option<(Element, bool, usize)> {
    match rest {
        [b'C', b'l', ..] => Some((Element::CL, false, 2)),
        [b'B', b'r', ..] => Some((Element::BR, false, 2)),
        [b'B', ..] => Some((Element::B, false, 1)),
        [b'C', ..] => Some((Element::C, false, 1)),
        [b'N', ..] => Some((Element::N, false, 1)),
        [b'O', ..] => Some((Element::O, false, 1)),
        [b'P', ..] => Some((Element::P, false, 1)),
        [b'S', ..] => Some((Element::S, false, 1)),
        [b'F', ..] => Some((Element::F, false, 1)),
        [b'I', ..] => Some((Element::I, false, 1)),
        [b'b', ..] => Some((Element::B, true, 1)),
        [b'c', ..] => Some((Element::C, true, 1)),
        [b'n', ..] => Some((Element::N, true, 1)),
        [b'o', ..] => Some((Element::O, true, 1)),
        [b'p', ..] => Some((Element::P, true, 1)),
        [b's', ..] => Some((Element::S, true, 1)),
        _ => None,
    }
}

/// Hydrogens an unbracketed atom would receive given its bonds. Shared with the
/// writer so it can decide when brackets are required.
pub(crate) fn implicit_hydrogens(element: Element, kekule_valence: u32) -> Option<u8> {
    element
        .default_valences()
        .iter()
        .map(|&v| v as u32)
        .find(|&v| v >= kekule_valence)
        .map(|v| (v - kekule_valence) as u8)
}

/// Whether an aromatic atom must take one double bond in the Kekulé form.
/// `bond_sum` counts aromatic bonds as 1.
fn needs_double_bond(atom: &Atom, bracket: bool, bond_sum: u32, has_exo_double: bool) -> Result<bool, String> {
    if has_exo_double {
        return Ok(false);
    }
    let h = if bracket { atom.hydrogens as u32 } else { 0 };
    let allowed: Vec<u32> = if bracket {
        match atom.element.allowed_valences(atom.formal_charge) {
            Some(v) => v.into_iter().map(u32::from).collect(),
            None => return Ok(false),
        }
    } else {
        atom.element.default_valences().iter().map(|&v| v as u32).collect()
    };
    let used = bond_sum + h;
    match allowed.iter().find(|&&v| v >= used) {
        Some(&v) => Ok(v > used),
        None => Err(format!("aromatic {} exceeds its valence", atom.element)),
    }
}

fn finish(raw_atoms: Vec<RawAtom>, raw_bonds: Vec<RawBond>, source: &str) -> Result<MolecularGraph, ChemError> {
    let n = raw_atoms.len();
    let mut bonds: Vec<Bond> = raw_bonds
        .iter()
        .map(|rb| {
            let both_aromatic = raw_atoms[rb.begin].atom.is_aromatic && raw_atoms[rb.end].atom.is_aromatic;
            let order = match rb.spec {
                Some(s) => s.order,
                None if both_aromatic => BondOrder::Aromatic,
                None => BondOrder::Single,
            };
            Bond {
                begin: rb.begin,
                end: rb.end,
                order,
                kekule_order: order_value(order),
                direction: rb.spec.and_then(|s| s.direction),
            }
        })
        .collect();

    for (i, b) in bonds.iter().enumerate() {
        if b.order == BondOrder::Aromatic && !(raw_atoms[b.begin].atom.is_aromatic && raw_atoms[b.end].atom.is_aromatic) {
            return Err(ChemError::Aromaticity(format!("aromatic bond {i} joins a non-aromatic atom")));
        }
    }

    let adjacency = build_adjacency(n, &bonds);
    let rings = RingInfo::perceive(n, &bonds, &adjacency);
    for (i, b) in bonds.iter_mut().enumerate() {
        if b.order == BondOrder::Aromatic && !rings.bond_in_ring(i) {
            if raw_bonds[i].spec.is_some() {
                return Err(ChemError::Aromaticity(format!("explicit aromatic bond {i} is not in a ring")));
            }
            b.order = BondOrder::Single;
            b.kekule_order = 1;
        }
    }
    for (i, ra) in raw_atoms.iter().enumerate() {
        if ra.atom.is_aromatic && !rings.atom_in_ring(i) {
            return Err(ChemError::Aromaticity(format!(
                "aromatic atom {} ({}) is not in a ring",
                i, ra.atom.element
            )));
        }
    }

    kekulize(&raw_atoms, &mut bonds, &adjacency)?;

    let mut atoms: Vec<Atom> = Vec::with_capacity(n);
    for (i, ra) in raw_atoms.into_iter().enumerate() {
        let mut atom = ra.atom;
        let used: u32 = adjacency[i].iter().map(|&(_, bi)| bonds[bi].kekule_order as u32).sum();
        if ra.bracket {
            if let Some(allowed) = atom.element.allowed_valences(atom.formal_charge) {
                let max = *allowed.iter().max().unwrap_or(&0) as u32;
                let total = used + atom.hydrogens as u32;
                if total > max {
                    return Err(ChemError::ValenceViolation {
                        atom: i,
                        element: atom.element.symbol().to_string(),
                        valence: total,
                    });
                }
            }
        } else {
            atom.hydrogens = implicit_hydrogens(atom.element, used).ok_or_else(|| ChemError::ValenceViolation {
                atom: i,
                element: atom.element.symbol().to_string(),
                valence: used,
            })?;
        }
        atoms.push(atom);
    }
    MolecularGraph::from_parts(atoms, bonds, source)
}

fn order_value(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single | BondOrder::Aromatic => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
    }
}

fn build_adjacency(n: usize, bonds: &[Bond]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        adj[b.begin].push((b.end, i));
        adj[b.end].push((b.begin, i));
    }
    adj
}

/// Assigns alternating single/double orders to aromatic bonds. Fails when the
/// aromatic atoms needing a double bond admit no perfect matching.
fn kekulize(raw_atoms: &[RawAtom], bonds: &mut [Bond], adjacency: &[Vec<(usize, usize)>]) -> Result<(), ChemError> {
    let n = raw_atoms.len();
    let mut needy = vec![false; n];
    for i in 0..n {
        let ra = &raw_atoms[i];
        if !ra.atom.is_aromatic {
            continue;
        }
        let mut bond_sum = 0;
        let mut exo_double = false;
        for &(_, bi) in &adjacency[i] {
            let b = &bonds[bi];
            bond_sum += order_value(b.order) as u32;
            if matches!(b.order, BondOrder::Double | BondOrder::Triple) {
                exo_double = true;
            }
        }
        needy[i] = needs_double_bond(&ra.atom, ra.bracket, bond_sum, exo_double).map_err(ChemError::Aromaticity)?;
    }
    // Candidate edges: aromatic bonds between two needy atoms.
    let mut options: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for i in 0..n {
        if !needy[i] {
            continue;
        }
        for &(j, bi) in &adjacency[i] {
            if needy[j] && bonds[bi].order == BondOrder::Aromatic {
                options[i].push((j, bi));
            }
        }
    }
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut chosen: Vec<usize> = Vec::new();
    if !match_all(&needy, &options, &mut mate, &mut chosen) {
        return Err(ChemError::Aromaticity("aromatic system cannot be kekulized".into()));
    }
    for b in bonds.iter_mut() {
        if b.order == BondOrder::Aromatic {
            b.kekule_order = 1;
        }
    }
    for bi in chosen {
        bonds[bi].kekule_order = 2;
    }
    Ok(())
}

fn match_all(
    needy: &[bool],
    options: &[Vec<(usize, usize)>],
    mate: &mut Vec<Option<usize>>,
    chosen: &mut Vec<usize>,
) -> bool {
    // Most constrained unmatched atom first.
    let mut best: Option<(usize, usize)> = None;
    for i in 0..needy.len() {
        if !needy[i] || mate[i].is_some() {
            continue;
        }
        let free = options[i].iter().filter(|&&(j, _)| mate[j].is_none()).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((i, free));
        }
    }
    let Some((i, _)) = best else {
        return true;
    };
    for &(j, bi) in &options[i] {
        if mate[j].is_some() {
            continue;
        }
        mate[i] = Some(j);
        mate[j] = Some(i);
        chosen.push(bi);
        if match_all(needy, options, mate, chosen) {
            return true;
        }
        chosen.pop();
        mate[i] = None;
        mate[j] = None;
    }
    false
}

/// Splits a SMILES string into generator tokens: bracket atoms, two-letter
/// halogens, `%nn` ring labels, and single characters.
pub fn tokenize_smiles(s: &str) -> Vec<String> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let len = match b[i] {
            b'[' => b[i..].iter().position(|&c| c == b']').map(|p| p + 1).unwrap_or(b.len() - i),
            b'%' if i + 2 < b.len() => 3,
            b'C' if b.get(i + 1) == Some(&b'l') => 2,
            b'B' if b.get(i + 1) == Some(&b'r') => 2,
            _ => {
                // Keep multi-byte characters whole.
                let ch = s[i..].chars().next().expect("in bounds");
                ch.len_utf8()
            }
        };
        out.push(s[i..i + len].to_string());
        i += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_kind(s: &str) -> ChemError {
        parse_smiles(s).expect_err(s)
    }

    #[test]
    fn methane_has_four_hydrogens() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atom(0).hydrogens, 4);
    }

    #[test]
    fn benzene_is_aromatic() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert!(m.atoms().iter().all(|a| a.is_aromatic && a.hydrogens == 1 && a.in_ring));
        assert_eq!(m.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).count(), 6);
        assert_eq!(m.bonds().iter().filter(|b| b.kekule_order == 2).count(), 3);
    }

    #[test]
    fn allene_has_two_double_bonds() {
        let m = parse_smiles("C=C=C").unwrap();
        assert_eq!(m.atom_count(), 3);
        assert_eq!(m.bonds().iter().filter(|b| b.order == BondOrder::Double).count(), 2);
        assert_eq!(m.atom(1).hydrogens, 0);
        assert_eq!(m.atom(0).hydrogens, 2);
    }

    #[test]
    fn error_kinds_are_distinct() {
        assert!(matches!(err_kind("C(("), ChemError::UnbalancedParenthesis { .. }));
        assert!(matches!(err_kind("CC)"), ChemError::UnbalancedParenthesis { .. }));
        assert!(matches!(err_kind("C1CC"), ChemError::RingClosure { .. }));
        assert!(matches!(err_kind("CXC"), ChemError::UnknownSymbol { .. }));
        assert!(matches!(err_kind("[Xx]"), ChemError::UnknownSymbol { .. }));
        assert!(matches!(err_kind("C(C)(C)(C)(C)C"), ChemError::ValenceViolation { .. }));
        assert!(matches!(err_kind("O=O=O"), ChemError::ValenceViolation { .. }));
        assert!(matches!(err_kind(""), ChemError::Empty));
    }

    #[test]
    fn rejects_non_kekulizable_lowercase_rings() {
        assert!(matches!(err_kind("c1cccc1"), ChemError::Aromaticity(_)));
        assert!(matches!(err_kind("c1ccnc1"), ChemError::Aromaticity(_)));
        assert!(matches!(err_kind("cc"), ChemError::Aromaticity(_)));
    }

    #[test]
    fn heteroaromatics() {
        let pyrrole = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(pyrrole.atom(3).hydrogens, 1);
        let pyridine = parse_smiles("c1ccncc1").unwrap();
        assert_eq!(pyridine.atom(3).hydrogens, 0);
        let furan = parse_smiles("c1ccoc1").unwrap();
        assert_eq!(furan.atom_count(), 5);
        let thiophene = parse_smiles("c1ccsc1").unwrap();
        assert_eq!(thiophene.atom(3).hydrogens, 0);
        let n_methylpyrrole = parse_smiles("Cn1cccc1").unwrap();
        assert_eq!(n_methylpyrrole.atom(1).hydrogens, 0);
        let pyridone = parse_smiles("O=c1cccc[nH]1").unwrap();
        assert_eq!(pyridone.atom_count(), 7);
        let pyridinium = parse_smiles("C[n+]1ccccc1").unwrap();
        assert_eq!(pyridinium.atom(1).formal_charge, 1);
        let indole = parse_smiles("c1ccc2[nH]ccc2c1").unwrap();
        assert_eq!(indole.rings().ring_count(), 2);
    }

    #[test]
    fn biphenyl_link_is_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let link = m.bond_between(5, 6).unwrap();
        assert_eq!(link.order, BondOrder::Single);
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("[13CH3][NH3+]").unwrap();
        assert_eq!(m.atom(0).isotope, Some(13));
        assert_eq!(m.atom(0).hydrogens, 3);
        assert_eq!(m.atom(1).formal_charge, 1);
        let nitro = parse_smiles("C[N+](=O)[O-]").unwrap();
        assert_eq!(nitro.atom(3).formal_charge, -1);
        let chiral = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(chiral.atom(1).chirality, Some(Chirality::Clockwise));
        assert_eq!(parse_smiles("[Fe++]").unwrap().atom(0).formal_charge, 2);
        assert_eq!(parse_smiles("[O-2]").unwrap().atom(0).formal_charge, -2);
    }

    #[test]
    fn ring_closures() {
        let m = parse_smiles("C1CCCCC1").unwrap();
        assert_eq!(m.bond_count(), 6);
        assert!(m.atoms().iter().all(|a| a.hydrogens == 2));
        let m = parse_smiles("C%10CC%10").unwrap();
        assert_eq!(m.bond_count(), 3);
        assert!(parse_smiles("C=1CCCCC=1").is_ok());
        assert!(matches!(err_kind("C=1CCCCC#1"), ChemError::RingClosure { .. }));
        assert!(matches!(err_kind("C11"), ChemError::RingClosure { .. }));
        assert!(matches!(err_kind("C12CC12"), ChemError::RingClosure { .. }));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(err_kind("C()C"), ChemError::Syntax { .. }));
        assert!(matches!(err_kind("C="), ChemError::Syntax { .. }));
        assert!(matches!(err_kind("=C"), ChemError::Syntax { .. }));
        assert!(matches!(err_kind("C==C"), ChemError::Syntax { .. }));
        assert!(matches!(err_kind("[CH"), ChemError::Syntax { .. }));
    }

    #[test]
    fn disconnected_components() {
        let m = parse_smiles("CCO.[Na+]").unwrap();
        assert_eq!(m.component_count(), 2);
    }

    #[test]
    fn stereo_bonds_are_annotations() {
        let m = parse_smiles("F/C=C/F").unwrap();
        assert_eq!(m.bond(0).direction, Some(BondDirection::Up));
        assert_eq!(m.bond(0).order, BondOrder::Single);
    }

    #[test]
    fn validity() {
        assert!(validity_check("CCO"));
        assert!(!validity_check(""));
        assert!(!validity_check("C(("));
    }

    #[test]
    fn tokenizer_keeps_multichar_tokens() {
        assert_eq!(
            tokenize_smiles("ClC[NH3+]c1%12Br"),
            vec!["Cl", "C", "[NH3+]", "c", "1", "%12", "Br"]
        );
    }
}
