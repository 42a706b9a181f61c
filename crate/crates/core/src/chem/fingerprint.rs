//! Circular (Morgan) fingerprints and Tanimoto similarity.
//!
//! Each atom starts from a hash of its local invariants; every iteration
//! folds in the sorted `(bond order, neighbour id)` list. Environments that
//! cover exactly the same bond set as an earlier one are dropped. Identifiers
//! are folded into the bit vector modulo its width.

use std::collections::{BTreeMap, HashSet};

use super::graph::MolecularGraph;
use super::ChemError;

pub const FINGERPRINT_WIDTH: usize = 2048;
pub const FINGERPRINT_RADIUS: usize = 2;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-dependent combination of a running hash with one more value.
pub fn hash_combine(seed: u64, value: u64) -> u64 {
    mix64(
        seed ^ value
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(seed << 6)
            .wrapping_add(seed >> 2),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
}

impl Fingerprint {
    pub fn empty(width: usize) -> Self {
        Fingerprint {
            words: vec![0; width.div_ceil(64)],
            width,
        }
    }

    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::empty(width);
        for b in bits {
            fp.set(b % width);
        }
        fp
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

fn atom_invariant(m: &MolecularGraph, i: usize) -> u64 {
    let a = m.atom(i);
    let fields = [
        a.element.atomic_number() as u64,
        m.total_connections(i) as u64,
        a.hydrogens as u64,
        (a.formal_charge as i64 + 16) as u64,
        a.isotope.unwrap_or(0) as u64,
        a.in_ring as u64,
        a.is_aromatic as u64,
    ];
    fields.iter().fold(0x5143_4f56_4745_4e31, |h, &v| hash_combine(h, v))
}

/// Environment identifiers up to `radius` with occurrence counts, sorted by id.
pub fn environment_counts(m: &MolecularGraph, radius: usize) -> Vec<(u64, u32)> {
    let n = m.atom_count();
    let words = m.bond_count().div_ceil(64).max(1);
    let mut ids: Vec<u64> = (0..n).map(|i| atom_invariant(m, i)).collect();
    let mut cover: Vec<Vec<u64>> = vec![vec![0; words]; n];
    let mut counts: BTreeMap<u64, u32> = BTreeMap::new();
    let mut seen_cover: HashSet<Vec<u64>> = HashSet::new();
    for &id in &ids {
        *counts.entry(id).or_insert(0) += 1;
    }
    for r in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_cover = Vec::with_capacity(n);
        for i in 0..n {
            let mut nbs: Vec<(u8, u64)> = m
                .neighbors(i)
                .iter()
                .map(|&(nb, bi)| (m.bond(bi).order.code(), ids[nb]))
                .collect();
            nbs.sort_unstable();
            let mut h = hash_combine(r as u64, ids[i]);
            for (code, nid) in &nbs {
                h = hash_combine(h, *code as u64);
                h = hash_combine(h, *nid);
            }
            let mut c = cover[i].clone();
            for &(nb, bi) in m.neighbors(i) {
                c[bi / 64] |= 1 << (bi % 64);
                for (w, x) in c.iter_mut().zip(&cover[nb]) {
                    *w |= x;
                }
            }
            next_ids.push(h);
            next_cover.push(c);
        }
        // Keep only environments whose bond set grew and has not been seen.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (next_ids[i], i));
        for i in order {
            let grew = next_cover[i] != cover[i];
            if grew && seen_cover.insert(next_cover[i].clone()) {
                *counts.entry(next_ids[i]).or_insert(0) += 1;
            }
        }
        ids = next_ids;
        cover = next_cover;
    }
    counts.into_iter().collect()
}

/// Radius-2, 2048-bit circular fingerprint.
pub fn morgan_fingerprint(m: &MolecularGraph) -> Fingerprint {
    morgan_fingerprint_with(m, FINGERPRINT_RADIUS, FINGERPRINT_WIDTH)
}

pub fn morgan_fingerprint_with(m: &MolecularGraph, radius: usize, width: usize) -> Fingerprint {
    Fingerprint::from_bits(
        width,
        environment_counts(m, radius)
            .into_iter()
            .map(|(id, _)| (id % width as u64) as usize),
    )
}

/// |a ∧ b| / |a ∨ b|, with 0/0 defined as 0.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.width != b.width {
        return Err(ChemError::WidthMismatch(a.width, b.width));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}
