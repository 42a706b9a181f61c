use super::element::Element;
use super::rings::RingInfo;
use super::ChemError;

/// Tetrahedral annotation carried over from the input. It never takes part in
/// ranking or matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    CounterClockwise,
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Small integer code used in hashing and ranking.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BondOrder::Single => "-",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => ":",
        }
    }
}

/// Directional single-bond marker (`/` or `\`), kept as an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub is_aromatic: bool,
    /// Total attached hydrogens, implicit ones resolved at parse time.
    pub hydrogens: u8,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
    pub in_ring: bool,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            formal_charge: 0,
            is_aromatic: false,
            hydrogens: 0,
            isotope: None,
            chirality: None,
            in_ring: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    /// Order in the assigned Kekulé structure: equals `order` for non-aromatic
    /// bonds, 1 or 2 for aromatic ones.
    pub kekule_order: u8,
    pub direction: Option<BondDirection>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

/// Heavy-atom molecular graph with resolved hydrogens and ring perception.
#[derive(Debug, Clone)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: RingInfo,
    source_smiles: String,
}

impl MolecularGraph {
    /// Assembles a graph and checks the structural invariants: dense atom
    /// indices, no self-loops, no duplicate bonds, aromatic bonds only between
    /// aromatic atoms.
    pub fn from_parts(
        mut atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        source_smiles: impl Into<String>,
    ) -> Result<Self, ChemError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (idx, b) in bonds.iter().enumerate() {
            if b.begin >= n || b.end >= n {
                return Err(ChemError::InvalidGraph(format!("bond {idx} references missing atom")));
            }
            if b.begin == b.end {
                return Err(ChemError::InvalidGraph(format!("bond {idx} is a self-loop")));
            }
            if adjacency[b.begin].iter().any(|&(nb, _)| nb == b.end) {
                return Err(ChemError::InvalidGraph(format!(
                    "duplicate bond between atoms {} and {}",
                    b.begin, b.end
                )));
            }
            if b.order == BondOrder::Aromatic && !(atoms[b.begin].is_aromatic && atoms[b.end].is_aromatic) {
                return Err(ChemError::InvalidGraph(format!("aromatic bond {idx} joins a non-aromatic atom")));
            }
            adjacency[b.begin].push((b.end, idx));
            adjacency[b.end].push((b.begin, idx));
        }
        let rings = RingInfo::perceive(n, &bonds, &adjacency);
        for (i, atom) in atoms.iter_mut().enumerate() {
            atom.in_ring = rings.atom_in_ring(i);
        }
        Ok(MolecularGraph {
            atoms,
            bonds,
            adjacency,
            rings,
            source_smiles: source_smiles.into(),
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn source_smiles(&self) -> &str {
        &self.source_smiles
    }

    pub fn rings(&self) -> &RingInfo {
        &self.rings
    }

    /// `(neighbour, bond index)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(nb, _)| nb == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// Sum of Kekulé bond orders plus attached hydrogens.
    pub fn total_valence(&self, i: usize) -> u32 {
        let bonds: u32 = self.adjacency[i]
            .iter()
            .map(|&(_, bi)| self.bonds[bi].kekule_order as u32)
            .sum();
        bonds + self.atoms[i].hydrogens as u32
    }

    /// Heavy degree plus hydrogens.
    pub fn total_connections(&self, i: usize) -> usize {
        self.degree(i) + self.atoms[i].hydrogens as usize
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// Atom sets of the connected components, each sorted, ordered by their
    /// smallest atom index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let a = comp[head];
                head += 1;
                for &(nb, _) in &self.adjacency[a] {
                    if !seen[nb] {
                        seen[nb] = true;
                        comp.push(nb);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Relabels atoms so that old atom `i` becomes new atom `perm[i]`.
    /// Bond list order follows the permuted begin atoms.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![None; self.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = Some(self.atoms[old].clone());
        }
        let atoms: Vec<Atom> = atoms.into_iter().map(|a| a.expect("perm is a bijection")).collect();
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                begin: perm[b.begin],
                end: perm[b.end],
                ..b.clone()
            })
            .collect();
        bonds.sort_by_key(|b| (b.begin.min(b.end), b.begin.max(b.end)));
        MolecularGraph::from_parts(atoms, bonds, self.source_smiles.clone())
            .expect("permutation preserves validity")
    }

    /// Heavy atoms plus hydrogens.
    pub fn total_atom_count(&self) -> usize {
        self.atoms.len() + self.atoms.iter().map(|a| a.hydrogens as usize).sum::<usize>()
    }
}
