//! Canonical SMILES.
//!
//! Atoms are ranked by iterative refinement of local invariants (a Morgan-style
//! partition refinement). Remaining ties are broken by trying every member of
//! the first tied class in turn and refining again; each complete ordering is
//! written out and the lexicographically smallest string wins. The result
//! therefore does not depend on the input atom order. Stereo annotations take
//! no part in ranking and are not written.

use super::graph::{BondOrder, MolecularGraph};
use super::smiles::implicit_hydrogens;

/// Upper bound on explored complete orderings. Beyond it the first ordering
/// found so far is kept; only highly symmetric cages reach this.
const MAX_ORDERINGS: usize = 4096;

/// Canonical SMILES of `m`. Aromatic atoms are written in lowercase form.
pub fn canonicalize(m: &MolecularGraph) -> String {
    if m.is_empty() {
        return String::new();
    }
    let classes = refine(m, initial_classes(m));
    let mut search = Search {
        m,
        best: None,
        explored: 0,
    };
    search.explore(classes);
    search.best.expect("at least one ordering")
}

/// Symmetry classes from invariant refinement without tie-breaking. Atoms in
/// different classes are never equivalent; equal classes usually are.
pub fn symmetry_classes(m: &MolecularGraph) -> Vec<u32> {
    refine(m, initial_classes(m))
}

fn initial_classes(m: &MolecularGraph) -> Vec<u32> {
    let keys: Vec<_> = (0..m.atom_count())
        .map(|i| {
            let a = m.atom(i);
            (
                m.degree(i),
                a.element.atomic_number(),
                a.isotope.unwrap_or(0),
                a.formal_charge,
                a.hydrogens,
                a.is_aromatic,
                a.in_ring,
            )
        })
        .collect();
    dense_rank(&keys)
}

fn dense_rank<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present") as u32)
        .collect()
}

fn class_count(classes: &[u32]) -> usize {
    let mut v = classes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn refine(m: &MolecularGraph, mut classes: Vec<u32>) -> Vec<u32> {
    let mut count = class_count(&classes);
    loop {
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..m.atom_count())
            .map(|i| {
                let mut nbs: Vec<(u32, u8)> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(nb, bi)| (classes[nb], m.bond(bi).order.code()))
                    .collect();
                nbs.sort_unstable();
                (classes[i], nbs)
            })
            .collect();
        let next = dense_rank(&keys);
        let next_count = class_count(&next);
        classes = next;
        if next_count == count {
            return classes;
        }
        count = next_count;
    }
}

struct Search<'a> {
    m: &'a MolecularGraph,
    best: Option<String>,
    explored: usize,
}

impl Search<'_> {
    fn explore(&mut self, classes: Vec<u32>) {
        if self.explored >= MAX_ORDERINGS && self.best.is_some() {
            return;
        }
        let n = classes.len();
        let tied = (0..n as u32).find(|c| classes.iter().filter(|&&x| x == *c).count() > 1);
        let Some(tied_class) = tied else {
            self.explored += 1;
            let s = write_smiles(self.m, &classes);
            if self.best.as_ref().is_none_or(|b| s < *b) {
                self.best = Some(s);
            }
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&i| classes[i] == tied_class).collect();
        for chosen in members {
            let keys: Vec<(u32, bool)> = (0..n).map(|i| (classes[i], i != chosen)).collect();
            let split = refine(self.m, dense_rank(&keys));
            self.explore(split);
            if self.explored >= MAX_ORDERINGS && self.best.is_some() {
                return;
            }
        }
    }
}

/// Writes SMILES following the atom order given by `rank` (lower first).
pub(crate) fn write_smiles(m: &MolecularGraph, rank: &[u32]) -> String {
    let n = m.atom_count();
    let sorted_neighbors: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = m.neighbors(i).to_vec();
            v.sort_by_key(|&(nb, _)| rank[nb]);
            v
        })
        .collect();

    // Pass 1: DFS tree and ring-closure bonds.
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    // Ring-closure bonds per atom: (bond, partner, is_opening).
    let mut closures: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    let mut bond_used = vec![false; m.bond_count()];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| rank[i]);
    let mut roots = Vec::new();
    for &start in &order {
        if visited[start] {
            continue;
        }
        roots.push(start);
        visited[start] = true;
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&mut (a, ref mut pos)) = stack.last_mut() {
            if *pos >= sorted_neighbors[a].len() {
                stack.pop();
                continue;
            }
            let (nb, bi) = sorted_neighbors[a][*pos];
            *pos += 1;
            if bond_used[bi] {
                continue;
            }
            bond_used[bi] = true;
            if visited[nb] {
                closures[nb].push((bi, a, true));
                closures[a].push((bi, nb, false));
            } else {
                visited[nb] = true;
                children[a].push((nb, bi));
                stack.push((nb, 0));
            }
        }
    }
    // Openings are recorded in discovery order of the closing atom; order them
    // by partner rank so digits are assigned deterministically.
    for c in closures.iter_mut() {
        c.sort_by_key(|&(_, partner, opening)| (opening, rank[partner]));
    }

    // Pass 2: emission.
    let mut out = String::new();
    let mut digit_of_bond: Vec<Option<u32>> = vec![None; m.bond_count()];
    let mut in_use: Vec<bool> = vec![false; 100];
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        // Explicit stack of emission tasks.
        enum Task {
            Atom(usize, Option<usize>),
            Text(&'static str),
        }
        let mut tasks = vec![Task::Atom(root, None)];
        while let Some(task) = tasks.pop() {
            match task {
                Task::Text(t) => out.push_str(t),
                Task::Atom(a, via) => {
                    if let Some(bi) = via {
                        out.push_str(bond_symbol(m, bi));
                    }
                    out.push_str(&atom_symbol(m, a));
                    let mut freed = Vec::new();
                    for &(bi, _, opening) in &closures[a] {
                        if opening {
                            let d = (1..100).find(|&d| !in_use[d]).expect("fewer than 100 open rings");
                            in_use[d] = true;
                            digit_of_bond[bi] = Some(d as u32);
                            out.push_str(bond_symbol(m, bi));
                            push_ring_label(&mut out, d as u32);
                        } else {
                            let d = digit_of_bond[bi].expect("ring opened before closing");
                            push_ring_label(&mut out, d);
                            freed.push(d as usize);
                        }
                    }
                    for d in freed {
                        in_use[d] = false;
                    }
                    let kids = &children[a];
                    // Last child continues the chain; others become branches.
                    if let Some(&(last, lbi)) = kids.last() {
                        tasks.push(Task::Atom(last, Some(lbi)));
                        for &(c, cbi) in kids[..kids.len() - 1].iter().rev() {
                            tasks.push(Task::Text(")"));
                            tasks.push(Task::Atom(c, Some(cbi)));
                            tasks.push(Task::Text("("));
                        }
                    }
                }
            }
        }
    }
    out
}

fn push_ring_label(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn bond_symbol(m: &MolecularGraph, bi: usize) -> &'static str {
    let b = m.bond(bi);
    match b.order {
        BondOrder::Single => {
            if m.atom(b.begin).is_aromatic && m.atom(b.end).is_aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
    }
}

fn atom_symbol(m: &MolecularGraph, i: usize) -> String {
    let a = m.atom(i);
    let symbol = if a.is_aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    let plain = a.element.is_organic_subset()
        && a.formal_charge == 0
        && a.isotope.is_none()
        && unbracketed_hydrogens(m, i) == Some(a.hydrogens);
    if plain {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match a.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => {
            s.push('H');
            s.push_str(&h.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

/// Hydrogen count the reader would assign to atom `i` written without
/// brackets, or `None` when that form would be read differently.
fn unbracketed_hydrogens(m: &MolecularGraph, i: usize) -> Option<u8> {
    let a = m.atom(i);
    if !a.is_aromatic {
        return implicit_hydrogens(a.element, kekule_sum(m, i));
    }
    let mut bond_sum = 0u32;
    let mut exo_double = false;
    let mut has_kekule_double = false;
    for &(_, bi) in m.neighbors(i) {
        let b = m.bond(bi);
        match b.order {
            BondOrder::Single | BondOrder::Aromatic => bond_sum += 1,
            BondOrder::Double => {
                bond_sum += 2;
                exo_double = true;
            }
            BondOrder::Triple => {
                bond_sum += 3;
                exo_double = true;
            }
        }
        if b.order == BondOrder::Aromatic && b.kekule_order == 2 {
            has_kekule_double = true;
        }
    }
    let target = a
        .element
        .default_valences()
        .iter()
        .map(|&v| v as u32)
        .find(|&v| v >= bond_sum)?;
    let needy = !exo_double && target > bond_sum;
    if needy != has_kekule_double {
        return None;
    }
    implicit_hydrogens(a.element, bond_sum + needy as u32)
}

fn kekule_sum(m: &MolecularGraph, i: usize) -> u32 {
    m.neighbors(i)
        .iter()
        .map(|&(_, bi)| m.bond(bi).kekule_order as u32)
        .sum()
}
