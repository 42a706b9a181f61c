//! Atom-contribution LogP (Wildman–Crippen scheme).
//!
//! Heavy atoms are typed by the first matching rule in the published order
//! (C1..C27, N1..N14, O1..O12, halogens, P, S); each attached hydrogen is typed
//! by its heavy neighbour (H1..H4). Neighbour patterns that the published
//! scheme writes as SMARTS are coded as predicates over the graph. Bonds left
//! unspecified in those patterns match single or aromatic bonds.

use crate::chem::{BondOrder, Element, MolecularGraph};

struct Nb {
    atom: usize,
    order: BondOrder,
}

struct Ctx<'a> {
    m: &'a MolecularGraph,
}

impl Ctx<'_> {
    fn nbs(&self, i: usize) -> Vec<Nb> {
        self.m
            .neighbors(i)
            .iter()
            .map(|&(atom, bi)| Nb { atom, order: self.m.bond(bi).order })
            .collect()
    }
    fn el(&self, i: usize) -> Element {
        self.m.atom(i).element
    }
    fn arom(&self, i: usize) -> bool {
        self.m.atom(i).is_aromatic
    }
    fn h(&self, i: usize) -> u8 {
        self.m.atom(i).hydrogens
    }
    fn x(&self, i: usize) -> usize {
        self.m.total_connections(i)
    }
    fn charge(&self, i: usize) -> i8 {
        self.m.atom(i).formal_charge
    }
    fn aliphatic(&self, i: usize) -> bool {
        !self.arom(i)
    }
    fn is(&self, i: usize, e: Element) -> bool {
        self.el(i) == e
    }
    fn aliphatic_c(&self, i: usize) -> bool {
        self.is(i, Element::C) && self.aliphatic(i)
    }
}

fn single_like(o: BondOrder) -> bool {
    matches!(o, BondOrder::Single | BondOrder::Aromatic)
}

/// `[N,O,P,S,F,Cl,Br,I]` with uppercase (aliphatic) semantics.
fn hetero_aliphatic(c: &Ctx, i: usize) -> bool {
    let e = c.el(i);
    c.aliphatic(i) && [Element::N, Element::O, Element::P, Element::S, Element::F, Element::CL, Element::BR, Element::I].contains(&e)
}

/// True when distinct single-like neighbours satisfy each predicate in turn.
fn distinct_neighbors(c: &Ctx, nbs: &[Nb], preds: &[&dyn Fn(&Nb) -> bool]) -> bool {
    fn rec(nbs: &[Nb], preds: &[&dyn Fn(&Nb) -> bool], used: &mut Vec<bool>) -> bool {
        let Some((first, rest)) = preds.split_first() else {
            return true;
        };
        for (k, nb) in nbs.iter().enumerate() {
            if !used[k] && first(nb) {
                used[k] = true;
                if rec(nbs, rest, used) {
                    return true;
                }
                used[k] = false;
            }
        }
        false
    }
    let _ = c;
    rec(nbs, preds, &mut vec![false; nbs.len()])
}

fn carbon_type(c: &Ctx, i: usize) -> (&'static str, f64) {
    let nbs = c.nbs(i);
    let h = c.h(i);
    let x = c.x(i);
    let ali_heavy = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
    let ali_c = |n: &Nb| single_like(n.order) && c.aliphatic_c(n.atom);
    let het = |n: &Nb| single_like(n.order) && hetero_aliphatic(c, n.atom);
    let arom_nb = |n: &Nb| single_like(n.order) && c.arom(n.atom);
    if c.aliphatic(i) {
        if h == 4
            || (h == 3 && nbs.iter().any(ali_c))
            || (h == 2 && distinct_neighbors(c, &nbs, &[&ali_c, &ali_c]))
        {
            return ("C1", 0.1441);
        }
        if (h == 1 && distinct_neighbors(c, &nbs, &[&ali_c, &ali_c, &ali_c]))
            || (h == 0 && distinct_neighbors(c, &nbs, &[&ali_c, &ali_c, &ali_c, &ali_c]))
        {
            return ("C2", 0.0);
        }
        if (h == 3 && nbs.iter().any(het)) || (h == 2 && x == 4 && distinct_neighbors(c, &nbs, &[&het, &ali_heavy])) {
            return ("C3", -0.2035);
        }
        if (h == 1 && x == 4 && distinct_neighbors(c, &nbs, &[&het, &ali_heavy, &ali_heavy]))
            || (h == 0 && x == 4 && distinct_neighbors(c, &nbs, &[&het, &ali_heavy, &ali_heavy, &ali_heavy]))
        {
            return ("C4", -0.2051);
        }
        if nbs
            .iter()
            .any(|n| n.order == BondOrder::Double && c.aliphatic(n.atom) && !c.is(n.atom, Element::C))
        {
            return ("C5", -0.2783);
        }
        let dbl_c = |n: &Nb| n.order == BondOrder::Double && c.aliphatic_c(n.atom);
        let has_dbl_c = nbs.iter().any(dbl_c);
        if (h == 2 && has_dbl_c)
            || (h == 1 && distinct_neighbors(c, &nbs, &[&dbl_c, &ali_heavy]))
            || (h == 0 && distinct_neighbors(c, &nbs, &[&dbl_c, &ali_heavy, &ali_heavy]))
            || nbs.iter().filter(|n| dbl_c(n)).count() >= 2
        {
            return ("C6", 0.1551);
        }
        if x == 2 && nbs.iter().any(|n| n.order == BondOrder::Triple && c.aliphatic(n.atom)) {
            return ("C7", 0.0017);
        }
        if h == 3 && nbs.iter().any(|n| single_like(n.order) && c.arom(n.atom) && c.is(n.atom, Element::C)) {
            return ("C8", 0.08452);
        }
        if h == 3 && nbs.iter().any(arom_nb) {
            return ("C9", -0.1444);
        }
        if x == 4 && nbs.iter().any(arom_nb) {
            match h {
                2 => return ("C10", -0.0516),
                1 => return ("C11", 0.1193),
                0 => return ("C12", -0.0967),
                _ => {}
            }
        }
    } else {
        let non_standard = |e: Element| {
            ![Element::C, Element::N, Element::O, Element::S, Element::F, Element::CL, Element::BR, Element::I].contains(&e)
        };
        if h == 0
            && nbs
                .iter()
                .any(|n| n.order == BondOrder::Single && c.aliphatic(n.atom) && non_standard(c.el(n.atom)))
        {
            return ("C13", -0.5443);
        }
        for (e, t, v) in [
            (Element::F, "C14", 0.0),
            (Element::CL, "C15", 0.245),
            (Element::BR, "C16", 0.198),
            (Element::I, "C17", 0.0),
        ] {
            if nbs.iter().any(|n| single_like(n.order) && c.is(n.atom, e)) {
                return (t, v);
            }
        }
        if h == 1 {
            return ("C18", 0.1581);
        }
        let arom_bonds = nbs.iter().filter(|n| n.order == BondOrder::Aromatic && c.arom(n.atom)).count();
        if arom_bonds >= 3 {
            return ("C19", 0.2955);
        }
        if arom_bonds >= 2 {
            let single_to = |pred: &dyn Fn(usize) -> bool| nbs.iter().any(|n| n.order == BondOrder::Single && pred(n.atom));
            if single_to(&|a| c.arom(a)) {
                return ("C20", 0.2713);
            }
            if single_to(&|a| c.aliphatic_c(a)) {
                return ("C21", 0.136);
            }
            if single_to(&|a| c.aliphatic(a) && c.is(a, Element::N)) {
                return ("C22", 0.4619);
            }
            if single_to(&|a| c.aliphatic(a) && c.is(a, Element::O)) {
                return ("C23", 0.5437);
            }
            if single_to(&|a| c.aliphatic(a) && c.is(a, Element::S)) {
                return ("C24", 0.1893);
            }
            if nbs.iter().any(|n| {
                n.order == BondOrder::Double
                    && c.aliphatic(n.atom)
                    && [Element::C, Element::N, Element::O].contains(&c.el(n.atom))
            }) {
                return ("C25", -0.8186);
            }
        }
    }
    if c.aliphatic(i) {
        let dbl_c = |n: &Nb| n.order == BondOrder::Double && c.aliphatic_c(n.atom);
        let arom_any = |n: &Nb| single_like(n.order) && c.arom(n.atom);
        let arom_c = |n: &Nb| single_like(n.order) && c.arom(n.atom) && c.is(n.atom, Element::C);
        let ali_heavy = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
        if distinct_neighbors(c, &nbs, &[&dbl_c, &arom_any, &ali_heavy])
            || distinct_neighbors(c, &nbs, &[&dbl_c, &arom_c, &arom_any])
            || (h == 1 && distinct_neighbors(c, &nbs, &[&dbl_c, &arom_any]))
            || nbs.iter().any(|n| n.order == BondOrder::Double && c.arom(n.atom) && c.is(n.atom, Element::C))
        {
            return ("C26", 0.264);
        }
        let exotic = |e: Element| {
            ![Element::C, Element::N, Element::O, Element::P, Element::S, Element::F, Element::CL, Element::BR, Element::I, Element::H]
                .contains(&e)
        };
        if x == 4 && nbs.iter().any(|n| single_like(n.order) && c.aliphatic(n.atom) && exotic(c.el(n.atom))) {
            return ("C27", 0.2148);
        }
    }
    ("CS", 0.08129)
}

fn nitrogen_type(c: &Ctx, i: usize) -> (&'static str, f64) {
    let nbs = c.nbs(i);
    let h = c.h(i);
    let q = c.charge(i);
    let ali = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
    let aro = |n: &Nb| single_like(n.order) && c.arom(n.atom);
    let any = |n: &Nb| single_like(n.order);
    if c.aliphatic(i) {
        if q == 0 {
            if h == 2 && nbs.iter().any(ali) {
                return ("N1", -1.019);
            }
            if h == 1 && distinct_neighbors(c, &nbs, &[&ali, &ali]) {
                return ("N2", -0.7096);
            }
            if h == 2 && nbs.iter().any(aro) {
                return ("N3", -1.027);
            }
            if h == 1 && distinct_neighbors(c, &nbs, &[&aro, &any]) {
                return ("N4", -0.5188);
            }
            let dbl = |n: &Nb| n.order == BondOrder::Double;
            if h == 1 && nbs.iter().any(dbl) {
                return ("N5", 0.08387);
            }
            if distinct_neighbors(c, &nbs, &[&dbl, &any]) {
                return ("N6", 0.1836);
            }
            if distinct_neighbors(c, &nbs, &[&ali, &ali, &ali]) {
                return ("N7", -0.3187);
            }
            if distinct_neighbors(c, &nbs, &[&aro, &any, &ali]) || distinct_neighbors(c, &nbs, &[&aro, &aro, &aro]) {
                return ("N8", -0.4458);
            }
            if nbs.iter().any(|n| n.order == BondOrder::Triple && c.aliphatic(n.atom)) {
                return ("N9", 0.01508);
            }
        }
        if q > 0 && h >= 1 {
            return ("N10", -1.95);
        }
    } else {
        if q == 0 {
            return ("N11", -0.3239);
        }
        if q > 0 {
            return ("N12", -1.119);
        }
    }
    if q > 0 && h == 0 && c.aliphatic(i) {
        let ali_any = |n: &Nb| c.aliphatic(n.atom);
        let single_ali = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
        let dbl_ali = |n: &Nb| n.order == BondOrder::Double && c.aliphatic(n.atom);
        let any_heavy = |n: &Nb| single_like(n.order);
        let _ = ali_any;
        if distinct_neighbors(c, &nbs, &[&single_ali, &single_ali, &single_ali, &single_ali])
            || distinct_neighbors(c, &nbs, &[&dbl_ali, &single_ali, &any_heavy])
            || distinct_neighbors(
                c,
                &nbs,
                &[
                    &|n: &Nb| n.order == BondOrder::Double && c.is(n.atom, Element::C),
                    &|n: &Nb| n.order == BondOrder::Double && c.is(n.atom, Element::N),
                ],
            )
        {
            return ("N13", -0.3396);
        }
    }
    if c.aliphatic(i)
        && ((q > 0 && nbs.iter().any(|n| n.order == BondOrder::Triple && c.aliphatic(n.atom))) || q < 0)
    {
        return ("N14", 0.2887);
    }
    if c.aliphatic(i) && q > 0 {
        // Azide central N: [N+](=[N-])=N
        let mut dbl_n = nbs.iter().filter(|n| n.order == BondOrder::Double && c.is(n.atom, Element::N));
        if dbl_n.clone().count() == 2 && dbl_n.any(|n| c.charge(n.atom) < 0) {
            return ("N14", 0.2887);
        }
    }
    ("NS", -0.4806)
}

fn oxygen_type(c: &Ctx, i: usize) -> (&'static str, f64) {
    let nbs = c.nbs(i);
    let h = c.h(i);
    let q = c.charge(i);
    if c.arom(i) {
        return ("O1", 0.1552);
    }
    if h == 1 || h == 2 {
        return ("O2", -0.2893);
    }
    let ali = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
    let aro = |n: &Nb| single_like(n.order) && c.arom(n.atom);
    let any = |n: &Nb| single_like(n.order);
    if distinct_neighbors(c, &nbs, &[&ali, &ali]) {
        return ("O3", -0.0684);
    }
    if distinct_neighbors(c, &nbs, &[&aro, &any]) {
        return ("O4", -0.4195);
    }
    let x = c.x(i);
    let dbl_to = |e: Element| nbs.iter().any(|n| n.order == BondOrder::Double && c.is(n.atom, e));
    if dbl_to(Element::N) || dbl_to(Element::O) || (x == 1 && q < 0 && nbs.iter().any(|n| single_like(n.order) && c.is(n.atom, Element::N))) {
        return ("O5", 0.0335);
    }
    if (x == 1 && q < 0 && nbs.iter().any(|n| single_like(n.order) && c.is(n.atom, Element::S)))
        || (q == 0 && nbs.iter().any(|n| n.order == BondOrder::Double && c.is(n.atom, Element::S) && c.charge(n.atom) == 0))
    {
        return ("O6", -0.3339);
    }
    if q == -1 {
        // [O-]C(=O)
        let carboxylate = nbs.iter().any(|n| {
            single_like(n.order)
                && c.aliphatic_c(n.atom)
                && c.nbs(n.atom)
                    .iter()
                    .any(|m| m.atom != i && m.order == BondOrder::Double && c.is(m.atom, Element::O) && c.aliphatic(m.atom))
        });
        if carboxylate {
            return ("O12", -1.326);
        }
    }
    if x == 1 && q < 0 && nbs.iter().any(|n| single_like(n.order) && !(c.aliphatic(n.atom) && (c.is(n.atom, Element::N) || c.is(n.atom, Element::S)))) {
        return ("O7", -1.189);
    }
    // Carbonyl-type oxygens.
    let carbonyl = nbs.iter().find(|n| n.order == BondOrder::Double && c.is(n.atom, Element::C));
    if let Some(cn) = carbonyl {
        let cat = cn.atom;
        if c.arom(cat) {
            return ("O8", 0.1788);
        }
        let others: Vec<Nb> = c.nbs(cat).into_iter().filter(|n| n.atom != i).collect();
        let ch = c.h(cat);
        let cx = c.x(cat);
        let ali_c = |n: &Nb| single_like(n.order) && c.aliphatic_c(n.atom);
        let ali = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom);
        let aro_c = |n: &Nb| single_like(n.order) && c.arom(n.atom) && c.is(n.atom, Element::C);
        let c_or_ar_c = |n: &Nb| single_like(n.order) && c.is(n.atom, Element::C);
        let aro_any = |n: &Nb| single_like(n.order) && c.arom(n.atom);
        let n_or_o = |n: &Nb| single_like(n.order) && c.aliphatic(n.atom) && (c.is(n.atom, Element::N) || c.is(n.atom, Element::O));
        if (ch == 1 && others.iter().any(ali_c))
            || distinct_neighbors(c, &others, &[&ali_c, &ali])
            || (ch == 1 && others.iter().any(n_or_o))
            || ch == 2
            || (cx == 2 && others.iter().any(|n| n.order == BondOrder::Double && c.is(n.atom, Element::O)))
        {
            return ("O9", -0.1526);
        }
        if (ch == 1 && others.iter().any(aro_c))
            || distinct_neighbors(c, &others, &[&c_or_ar_c, &aro_any])
            || distinct_neighbors(c, &others, &[&aro_c, &ali])
        {
            return ("O10", 0.1129);
        }
        let hetero = |n: &Nb| single_like(n.order) && !c.is(n.atom, Element::C);
        if distinct_neighbors(c, &others, &[&hetero, &hetero]) {
            return ("O11", 0.4833);
        }
    }
    ("OS", -0.1188)
}

fn heavy_type(c: &Ctx, i: usize) -> (&'static str, f64) {
    let e = c.el(i);
    let q = c.charge(i);
    match e {
        Element::C => carbon_type(c, i),
        Element::N => nitrogen_type(c, i),
        Element::O => oxygen_type(c, i),
        Element::F if q == 0 => ("F", 0.4202),
        Element::CL if q == 0 => ("Cl", 0.6895),
        Element::BR if q == 0 => ("Br", 0.8456),
        Element::I if q == 0 => ("I", 0.8857),
        Element::F | Element::CL | Element::BR | Element::I => ("Hal", -2.996),
        Element::P => ("P", 0.8612),
        Element::S => {
            let dbl_het = c.nbs(i).iter().any(|n| {
                n.order == BondOrder::Double
                    && c.aliphatic(n.atom)
                    && [Element::N, Element::O, Element::P, Element::S].contains(&c.el(n.atom))
            });
            if c.aliphatic(i) && (q != 0 || dbl_het) {
                ("S2", -0.0024)
            } else if c.aliphatic(i) {
                ("S1", 0.6482)
            } else {
                ("S3", 0.6237)
            }
        }
        Element::H => ("HS", 0.1125),
        _ => match e.atomic_number() {
            3 | 11 | 19 if q > 0 => ("Hal", -2.996),
            21..=30 | 39..=48 | 72..=80 => ("Me2", -0.0025),
            _ => ("Me1", -0.3808),
        },
    }
}

fn hydrogen_contribution(c: &Ctx, i: usize) -> f64 {
    let e = c.el(i);
    if e == Element::C || e == Element::H {
        return 0.123;
    }
    if e == Element::O {
        let nbs = c.nbs(i);
        let heavy = nbs.first();
        if let Some(n) = heavy {
            let a = n.atom;
            let sp3_c = c.aliphatic_c(a) && c.x(a) == 4;
            let arom_c = c.arom(a) && c.is(a, Element::C);
            if sp3_c || arom_c {
                return -0.2677;
            }
            let ea = c.el(a);
            let excluded = c.aliphatic(a) && [Element::C, Element::N, Element::O, Element::S].contains(&ea);
            if !excluded {
                if ea == Element::N {
                    return 0.2142;
                }
                return -0.2677;
            }
            if ea == Element::N {
                return 0.2142;
            }
            if ea == Element::C
                && c.nbs(a).iter().any(|m| {
                    m.atom != i
                        && m.order == BondOrder::Double
                        && (matches!(c.el(m.atom), Element::C | Element::N) || (c.aliphatic(m.atom) && matches!(c.el(m.atom), Element::O | Element::S)))
                })
            {
                return 0.298;
            }
            if ea == Element::O || ea == Element::S {
                return 0.298;
            }
        }
        return 0.1125;
    }
    if e == Element::N {
        return 0.2142;
    }
    // H on any other heavy atom: [#1][!C;!N;!O]
    -0.2677
}

/// Per-atom contributions (heavy atom plus its hydrogens) and the type label.
pub fn crippen_contributions(m: &MolecularGraph) -> Vec<(&'static str, f64)> {
    let c = Ctx { m };
    (0..m.atom_count())
        .map(|i| {
            let (t, v) = heavy_type(&c, i);
            let h = m.atom(i).hydrogens as f64;
            (t, v + h * hydrogen_contribution(&c, i))
        })
        .collect()
}

pub fn crippen_logp(m: &MolecularGraph) -> f64 {
    crippen_contributions(m).iter().map(|(_, v)| v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn logp(s: &str) -> f64 {
        crippen_logp(&parse_smiles(s).unwrap())
    }

    #[test]
    fn small_molecules() {
        // Hand sums: ethane = 2 x C1 + 6 x H1.
        assert!((logp("CC") - (2.0 * 0.1441 + 6.0 * 0.123)).abs() < 1e-9);
        // Methanol: C3 + 3 H1 + O2 + H2.
        assert!((logp("CO") - (-0.2035 + 3.0 * 0.123 - 0.2893 - 0.2677)).abs() < 1e-9);
        // Benzene: 6 x (C18 + H1).
        assert!((logp("c1ccccc1") - 6.0 * (0.1581 + 0.123)).abs() < 1e-9);
    }

    #[test]
    fn acid_hydrogen_is_h4() {
        let types = crippen_contributions(&parse_smiles("CC(=O)O").unwrap());
        // O-H of the acid: O2 + H4.
        assert!((types[3].1 - (-0.2893 + 0.298)).abs() < 1e-9);
        assert_eq!(types[2].0, "O9");
    }
}
