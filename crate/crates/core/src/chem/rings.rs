//! Ring perception: ring bonds via bridge detection, and a smallest set of
//! smallest rings computed as a minimum cycle basis over Horton candidates.

use std::collections::{HashSet, VecDeque};

use super::graph::Bond;

#[derive(Debug, Clone, Default)]
pub struct RingInfo {
    bond_in_ring: Vec<bool>,
    atom_in_ring: Vec<bool>,
    /// Atom cycles, each listed in walking order.
    rings: Vec<Vec<usize>>,
    /// Bond indices of each ring in `rings`.
    ring_bonds: Vec<Vec<usize>>,
}

type EdgeSet = Vec<u64>;

fn set_bit(s: &mut EdgeSet, i: usize) {
    s[i / 64] |= 1 << (i % 64);
}

fn popcount(s: &EdgeSet) -> u32 {
    s.iter().map(|w| w.count_ones()).sum()
}

impl RingInfo {
    pub fn perceive(n_atoms: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> RingInfo {
        let bond_in_ring = find_ring_bonds(n_atoms, bonds.len(), adjacency);
        let mut atom_in_ring = vec![false; n_atoms];
        for (i, b) in bonds.iter().enumerate() {
            if bond_in_ring[i] {
                atom_in_ring[b.begin] = true;
                atom_in_ring[b.end] = true;
            }
        }
        let ring_bonds = minimum_cycle_basis(n_atoms, bonds, adjacency, &bond_in_ring, &atom_in_ring);
        let rings = ring_bonds.iter().map(|rb| walk_cycle(bonds, rb)).collect();
        RingInfo {
            bond_in_ring,
            atom_in_ring,
            rings,
            ring_bonds,
        }
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_in_ring[bond]
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_in_ring[atom]
    }

    /// Smallest set of smallest rings as atom cycles.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn ring_bonds(&self) -> &[Vec<usize>] {
        &self.ring_bonds
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// Number of SSSR rings containing `atom`.
    pub fn atom_ring_count(&self, atom: usize) -> usize {
        self.rings.iter().filter(|r| r.contains(&atom)).count()
    }

    pub fn atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.rings.iter().any(|r| r.len() == size && r.contains(&atom))
    }

    /// Atoms shared by two rings that have exactly that one atom in common.
    pub fn spiro_atoms(&self) -> Vec<usize> {
        let mut out = HashSet::new();
        for i in 0..self.rings.len() {
            for j in i + 1..self.rings.len() {
                let shared: Vec<usize> = self.rings[i]
                    .iter()
                    .copied()
                    .filter(|a| self.rings[j].contains(a))
                    .collect();
                if shared.len() == 1 {
                    out.insert(shared[0]);
                }
            }
        }
        let mut v: Vec<usize> = out.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Ends of the shared path of ring pairs that share more than one bond.
    pub fn bridgehead_atoms(&self, bonds: &[Bond]) -> Vec<usize> {
        let mut out = HashSet::new();
        for i in 0..self.ring_bonds.len() {
            for j in i + 1..self.ring_bonds.len() {
                let shared: Vec<usize> = self.ring_bonds[i]
                    .iter()
                    .copied()
                    .filter(|b| self.ring_bonds[j].contains(b))
                    .collect();
                if shared.len() < 2 {
                    continue;
                }
                let mut deg = std::collections::HashMap::new();
                for &b in &shared {
                    *deg.entry(bonds[b].begin).or_insert(0) += 1;
                    *deg.entry(bonds[b].end).or_insert(0) += 1;
                }
                for (atom, d) in deg {
                    if d == 1 {
                        out.insert(atom);
                    }
                }
            }
        }
        let mut v: Vec<usize> = out.into_iter().collect();
        v.sort_unstable();
        v
    }
}

fn find_ring_bonds(n: usize, n_bonds: usize, adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    // Iterative Tarjan bridge finding; a bond is a ring bond iff it is not a bridge.
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; n_bonds];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, parent bond, next neighbour position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, pbond, ref mut pos)) = stack.last_mut() {
            if *pos < adjacency[v].len() {
                let (w, b) = adjacency[v][*pos];
                *pos += 1;
                if b == pbond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, b, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[pbond] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|&b| !b).collect()
}

fn minimum_cycle_basis(
    n: usize,
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
    bond_in_ring: &[bool],
    atom_in_ring: &[bool],
) -> Vec<Vec<usize>> {
    let ring_bond_count = bond_in_ring.iter().filter(|&&r| r).count();
    if ring_bond_count == 0 {
        return Vec::new();
    }
    let ring_atom_count = atom_in_ring.iter().filter(|&&r| r).count();
    let blocks = ring_components(n, adjacency, bond_in_ring);
    let cyclomatic = ring_bond_count + blocks - ring_atom_count;
    let words = bonds.len().div_ceil(64);

    // Horton candidates: for every ring atom v and ring bond (x, y), the cycle
    // P(v,x) + (x,y) + P(y,v) when the two shortest paths meet only at v.
    let mut candidates: Vec<EdgeSet> = Vec::new();
    let mut seen: HashSet<EdgeSet> = HashSet::new();
    for v in 0..n {
        if !atom_in_ring[v] {
            continue;
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut dist = vec![usize::MAX; n];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(a) = queue.pop_front() {
            for &(b, bi) in &adjacency[a] {
                if bond_in_ring[bi] && dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    parent[b] = Some((a, bi));
                    queue.push_back(b);
                }
            }
        }
        let path_to_root = |mut a: usize| {
            let mut atoms = vec![a];
            let mut edges = Vec::new();
            while let Some((p, bi)) = parent[a] {
                edges.push(bi);
                atoms.push(p);
                a = p;
            }
            (atoms, edges)
        };
        for (bi, b) in bonds.iter().enumerate() {
            if !bond_in_ring[bi] || dist[b.begin] == usize::MAX || dist[b.end] == usize::MAX {
                continue;
            }
            if parent[b.begin].map(|p| p.1) == Some(bi) || parent[b.end].map(|p| p.1) == Some(bi) {
                continue;
            }
            let (pa, ea) = path_to_root(b.begin);
            let (pb, eb) = path_to_root(b.end);
            let shared = pa.iter().filter(|x| pb.contains(x)).count();
            if shared != 1 {
                continue;
            }
            let mut set = vec![0u64; words];
            for &e in ea.iter().chain(eb.iter()) {
                set_bit(&mut set, e);
            }
            set_bit(&mut set, bi);
            if seen.insert(set.clone()) {
                candidates.push(set);
            }
        }
    }
    candidates.sort_by(|a, b| popcount(a).cmp(&popcount(b)).then_with(|| a.cmp(b)));

    // Greedy independent selection by Gaussian elimination over GF(2).
    let mut basis: Vec<(usize, EdgeSet)> = Vec::new();
    let mut chosen: Vec<EdgeSet> = Vec::new();
    for cand in candidates {
        if chosen.len() == cyclomatic {
            break;
        }
        let mut reduced = cand.clone();
        for (pivot, row) in &basis {
            if reduced[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (r, x) in reduced.iter_mut().zip(row) {
                    *r ^= x;
                }
            }
        }
        let pivot = reduced
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        if let Some(p) = pivot {
            basis.push((p, reduced));
            chosen.push(cand);
        }
    }
    chosen
        .into_iter()
        .map(|set| (0..bonds.len()).filter(|&i| set[i / 64] >> (i % 64) & 1 == 1).collect())
        .collect()
}

fn ring_components(n: usize, adjacency: &[Vec<(usize, usize)>], bond_in_ring: &[bool]) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] || !adjacency[s].iter().any(|&(_, b)| bond_in_ring[b]) {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for &(b, bi) in &adjacency[a] {
                if bond_in_ring[bi] && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    count
}

fn walk_cycle(bonds: &[Bond], ring_bonds: &[usize]) -> Vec<usize> {
    let mut remaining: Vec<usize> = ring_bonds.to_vec();
    let first = remaining.remove(0);
    let start = bonds[first].begin;
    let mut cycle = vec![start];
    let mut current = bonds[first].end;
    while current != start {
        cycle.push(current);
        let pos = remaining
            .iter()
            .position(|&b| bonds[b].begin == current || bonds[b].end == current)
            .expect("ring bonds form a closed cycle");
        let b = remaining.remove(pos);
        current = bonds[b].other(current);
    }
    cycle
}
