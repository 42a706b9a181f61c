//! Subgraph monomorphism search by backtracking with connectivity-ordered
//! query atoms (VF2-style feasibility pruning).

use super::graph::MolecularGraph;

/// Every injective mapping of query atoms onto target atoms that preserves
/// element, aromatic flag, and the presence and order of every query bond.
/// `mapping[q]` is the target atom for query atom `q`.
pub fn substructure_match(query: &MolecularGraph, target: &MolecularGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    search(query, target, usize::MAX, &mut |m| out.push(m.to_vec()));
    out
}

/// True when at least one mapping exists.
pub fn has_substructure(query: &MolecularGraph, target: &MolecularGraph) -> bool {
    let mut found = false;
    search(query, target, 1, &mut |_| found = true);
    found
}

pub fn count_matches(query: &MolecularGraph, target: &MolecularGraph) -> usize {
    let mut n = 0;
    search(query, target, usize::MAX, &mut |_| n += 1);
    n
}

/// Number of distinct target atom sets covered by a match.
pub fn count_unique_matches(query: &MolecularGraph, target: &MolecularGraph) -> usize {
    let mut sets = std::collections::HashSet::new();
    search(query, target, usize::MAX, &mut |m| {
        let mut s = m.to_vec();
        s.sort_unstable();
        sets.insert(s);
    });
    sets.len()
}

fn match_order(query: &MolecularGraph) -> Vec<usize> {
    let n = query.atom_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // New component: start from the highest-degree unplaced atom.
        let start = (0..n)
            .filter(|&i| !placed[i])
            .max_by_key(|&i| (query.degree(i), std::cmp::Reverse(i)))
            .expect("unplaced atom remains");
        placed[start] = true;
        order.push(start);
        let mut head = order.len() - 1;
        while head < order.len() {
            let a = order[head];
            head += 1;
            let mut nbs: Vec<usize> = query
                .neighbors(a)
                .iter()
                .map(|&(nb, _)| nb)
                .filter(|&nb| !placed[nb])
                .collect();
            nbs.sort_by_key(|&nb| (std::cmp::Reverse(query.degree(nb)), nb));
            for nb in nbs {
                if !placed[nb] {
                    placed[nb] = true;
                    order.push(nb);
                }
            }
        }
    }
    order
}

fn search(query: &MolecularGraph, target: &MolecularGraph, limit: usize, emit: &mut dyn FnMut(&[usize])) {
    let qn = query.atom_count();
    if qn == 0 || qn > target.atom_count() {
        return;
    }
    let order = match_order(query);
    let mut mapping = vec![usize::MAX; qn];
    let mut used = vec![false; target.atom_count()];
    let mut found = 0usize;
    extend(query, target, &order, 0, &mut mapping, &mut used, &mut found, limit, emit);
}

#[allow(clippy::too_many_arguments)]
fn extend(
    query: &MolecularGraph,
    target: &MolecularGraph,
    order: &[usize],
    depth: usize,
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
    found: &mut usize,
    limit: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    if *found >= limit {
        return;
    }
    if depth == order.len() {
        *found += 1;
        emit(mapping);
        return;
    }
    let q = order[depth];
    let anchor = query
        .neighbors(q)
        .iter()
        .find(|&&(nb, _)| mapping[nb] != usize::MAX)
        .map(|&(nb, _)| mapping[nb]);
    let candidates: Vec<usize> = match anchor {
        Some(t) => target.neighbors(t).iter().map(|&(nb, _)| nb).collect(),
        None => (0..target.atom_count()).collect(),
    };
    let qa = query.atom(q);
    for t in candidates {
        if used[t] {
            continue;
        }
        let ta = target.atom(t);
        if ta.element != qa.element || ta.is_aromatic != qa.is_aromatic || target.degree(t) < query.degree(q) {
            continue;
        }
        let consistent = query.neighbors(q).iter().all(|&(qnb, qbi)| {
            let tnb = mapping[qnb];
            tnb == usize::MAX
                || target
                    .bond_between(t, tnb)
                    .is_some_and(|tb| tb.order == query.bond(qbi).order)
        });
        if !consistent {
            continue;
        }
        mapping[q] = t;
        used[t] = true;
        extend(query, target, order, depth + 1, mapping, used, found, limit, emit);
        mapping[q] = usize::MAX;
        used[t] = false;
        if *found >= limit {
            return;
        }
    }
}
