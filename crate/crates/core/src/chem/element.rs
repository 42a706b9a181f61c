//! Periodic table subset used by the parser and descriptors.

use std::fmt;

/// A chemical element supported by the SMILES reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

struct ElementData {
    number: u8,
    symbol: &'static str,
    mass: f64,
    /// Allowed neutral valences, ascending. Empty means unchecked (metals).
    valences: &'static [u8],
}

const TABLE: &[ElementData] = &[
    ElementData { number: 1, symbol: "H", mass: 1.008, valences: &[1] },
    ElementData { number: 3, symbol: "Li", mass: 6.941, valences: &[] },
    ElementData { number: 5, symbol: "B", mass: 10.812, valences: &[3] },
    ElementData { number: 6, symbol: "C", mass: 12.011, valences: &[4] },
    ElementData { number: 7, symbol: "N", mass: 14.007, valences: &[3] },
    ElementData { number: 8, symbol: "O", mass: 15.999, valences: &[2] },
    ElementData { number: 9, symbol: "F", mass: 18.998, valences: &[1] },
    ElementData { number: 11, symbol: "Na", mass: 22.99, valences: &[] },
    ElementData { number: 12, symbol: "Mg", mass: 24.305, valences: &[] },
    ElementData { number: 13, symbol: "Al", mass: 26.982, valences: &[3] },
    ElementData { number: 14, symbol: "Si", mass: 28.086, valences: &[4] },
    ElementData { number: 15, symbol: "P", mass: 30.974, valences: &[3, 5] },
    ElementData { number: 16, symbol: "S", mass: 32.067, valences: &[2, 4, 6] },
    ElementData { number: 17, symbol: "Cl", mass: 35.453, valences: &[1] },
    ElementData { number: 19, symbol: "K", mass: 39.098, valences: &[] },
    ElementData { number: 20, symbol: "Ca", mass: 40.078, valences: &[] },
    ElementData { number: 26, symbol: "Fe", mass: 55.845, valences: &[] },
    ElementData { number: 29, symbol: "Cu", mass: 63.546, valences: &[] },
    ElementData { number: 30, symbol: "Zn", mass: 65.39, valences: &[] },
    ElementData { number: 32, symbol: "Ge", mass: 72.61, valences: &[4] },
    ElementData { number: 33, symbol: "As", mass: 74.922, valences: &[3, 5] },
    ElementData { number: 34, symbol: "Se", mass: 78.96, valences: &[2, 4, 6] },
    ElementData { number: 35, symbol: "Br", mass: 79.904, valences: &[1] },
    ElementData { number: 50, symbol: "Sn", mass: 118.711, valences: &[2, 4] },
    ElementData { number: 52, symbol: "Te", mass: 127.6, valences: &[2, 4, 6] },
    ElementData { number: 53, symbol: "I", mass: 126.904, valences: &[1, 3, 5] },
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE.iter().find(|e| e.symbol == symbol).map(|e| Element(e.number))
    }

    pub fn from_atomic_number(number: u8) -> Option<Element> {
        TABLE.iter().find(|e| e.number == number).map(|e| Element(e.number))
    }

    fn data(self) -> &'static ElementData {
        TABLE
            .iter()
            .find(|e| e.number == self.0)
            .expect("element constructed from table")
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        self.data().symbol
    }

    /// Standard atomic weight in g/mol.
    pub fn mass(self) -> f64 {
        self.data().mass
    }

    /// Members of the SMILES organic subset may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may carry the aromatic (lowercase) flag.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
    }

    pub fn is_halogen(self) -> bool {
        matches!(self.0, 9 | 17 | 35 | 53)
    }

    /// Neutral valences for the element.
    pub fn default_valences(self) -> &'static [u8] {
        self.data().valences
    }

    /// Allowed valences for the element carrying `charge`. Charged p-block atoms
    /// take the valences of their isoelectronic neighbour (N+ behaves like C,
    /// O- like F). Returns `None` when valence is not checked.
    pub fn allowed_valences(self, charge: i8) -> Option<Vec<u8>> {
        if charge == 0 {
            let v = self.default_valences();
            return if v.is_empty() { None } else { Some(v.to_vec()) };
        }
        let z = self.0 as i16;
        if z == 1 {
            // H+ or H- carry no bonds.
            return Some(vec![0]);
        }
        let shifted = z - charge as i16;
        let same_period = |a: i16, b: i16| period(a) == period(b);
        let p_block = |n: i16| matches!(n, 5..=9 | 13..=17 | 31..=35 | 49..=53);
        if p_block(z) && p_block(shifted) && same_period(z, shifted) {
            let e = Element::from_atomic_number(shifted as u8)?;
            let v = e.default_valences();
            return if v.is_empty() { None } else { Some(v.to_vec()) };
        }
        None
    }
}

fn period(z: i16) -> u8 {
    match z {
        1..=2 => 1,
        3..=10 => 2,
        11..=18 => 3,
        19..=36 => 4,
        37..=54 => 5,
        _ => 6,
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_round_trip() {
        for sym in ["C", "Cl", "Br", "Se", "Na"] {
            let e = Element::from_symbol(sym).unwrap();
            assert_eq!(e.symbol(), sym);
        }
        assert!(Element::from_symbol("Xx").is_none());
    }

    #[test]
    fn charged_valences_shift() {
        assert_eq!(Element::N.allowed_valences(1), Some(vec![4]));
        assert_eq!(Element::O.allowed_valences(-1), Some(vec![1]));
        assert_eq!(Element::C.allowed_valences(-1), Some(vec![3]));
        assert_eq!(Element::S.allowed_valences(1), Some(vec![3, 5]));
        assert_eq!(Element::from_symbol("Na").unwrap().allowed_valences(1), None);
    }
}
