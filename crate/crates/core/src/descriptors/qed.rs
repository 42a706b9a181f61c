//! Quantitative estimate of drug-likeness with unit weights.
//!
//! Each property passes through an asymmetric double sigmoid normalised by
//! its maximum; the score is the geometric mean of the eight desirabilities.

use super::properties::{compute_properties, PropertyVector};
use crate::chem::MolecularGraph;

/// Floor applied to each desirability before taking logarithms.
pub const QED_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Ads {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    dmax: f64,
}

impl Ads {
    const fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64, dmax: f64) -> Self {
        Ads { a, b, c, d, e, f, dmax }
    }

    fn eval(&self, x: f64) -> f64 {
        let exp1 = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let exp2 = 1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp();
        (self.a + self.b / exp1 * (1.0 - 1.0 / exp2)) / self.dmax
    }
}

const MW: Ads = Ads::new(2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561);
const ALOGP: Ads = Ads::new(3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604);
const HBA: Ads = Ads::new(2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046);
const HBD: Ads = Ads::new(1.618662227, 1010.051101, 0.985094388, 1e-9, 0.713820843, 0.920922555, 258.1632616);
const PSA: Ads = Ads::new(1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167);
const ROTB: Ads = Ads::new(0.01, 272.4121427, 2.558379970, 1.565547684, 1.271567166, 2.758063707, 105.4420403);
const AROM: Ads = Ads::new(3.217788970, 957.7374108, 2.274627939, 1e-9, 1.317690384, 0.375760881, 312.3372610);
const ALERTS: Ads = Ads::new(0.01, 1199.094025, -0.09002883, 1e-9, 0.185904477, 0.875193782, 417.7253140);

/// The eight desirabilities in property order (mw, logp, hba, hbd, psa, rotb, arom, alerts).
pub fn desirabilities(p: &PropertyVector) -> [f64; 8] {
    [
        MW.eval(p.mw),
        ALOGP.eval(p.logp),
        HBA.eval(p.hba as f64),
        HBD.eval(p.hbd as f64),
        PSA.eval(p.psa),
        ROTB.eval(p.rotb as f64),
        AROM.eval(p.arom as f64),
        ALERTS.eval(p.alerts as f64),
    ]
}

pub fn qed_from_properties(p: &PropertyVector) -> f64 {
    let d = desirabilities(p);
    let mean_log = d.iter().map(|&x| x.max(QED_EPSILON).ln()).sum::<f64>() / d.len() as f64;
    mean_log.exp().min(1.0)
}

pub fn qed(m: &MolecularGraph) -> f64 {
    qed_from_properties(&compute_properties(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn desirability_peaks_near_one() {
        // The MW curve is normalised so its maximum is close to 1.
        let best = (200..500).map(|x| MW.eval(x as f64)).fold(0.0, f64::max);
        assert!((best - 1.0).abs() < 0.01, "{best}");
    }

    #[test]
    fn bounded() {
        for s in ["C", "CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC"] {
            let q = qed(&parse_smiles(s).unwrap());
            assert!(q > 0.0 && q <= 1.0, "{s} {q}");
        }
    }
}
