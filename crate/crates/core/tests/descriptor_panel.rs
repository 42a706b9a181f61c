//! Descriptor values against a frozen panel computed with an external
//! reference toolkit (see fixtures/reference_panel.tsv).

use covgen::chem::parse_smiles;
use covgen::chem::fingerprint::environment_counts;
use covgen::descriptors::{compute_properties, qed, qed_from_properties, sa_breakdown, sa_score, FragmentScoreTable};

struct Row {
    name: String,
    smiles: String,
    mw: f64,
    logp: f64,
    tpsa: f64,
    hba: u32,
    hbd: u32,
    rotb: u32,
    arom: u32,
    qed: f64,
    sa: f64,
}

fn panel() -> Vec<Row> {
    let text = include_str!("fixtures/reference_panel.tsv");
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            Row {
                name: f[0].into(),
                smiles: f[1].into(),
                mw: f[2].parse().unwrap(),
                logp: f[3].parse().unwrap(),
                tpsa: f[4].parse().unwrap(),
                hba: f[5].parse().unwrap(),
                hbd: f[6].parse().unwrap(),
                rotb: f[7].parse().unwrap(),
                arom: f[8].parse().unwrap(),
                qed: f[9].parse().unwrap(),
                sa: f[10].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn counts_and_surface_area_match_panel() {
    for r in panel() {
        let p = compute_properties(&parse_smiles(&r.smiles).unwrap());
        assert!((p.mw - r.mw).abs() < 0.01, "{} mw {}", r.name, p.mw);
        assert!((p.psa - r.tpsa).abs() < 0.01, "{} tpsa {}", r.name, p.psa);
        assert_eq!(
            (p.hba, p.hbd, p.rotb, p.arom),
            (r.hba, r.hbd, r.rotb, r.arom),
            "{} counts",
            r.name
        );
    }
}

#[test]
fn logp_within_half_unit() {
    let rows = panel();
    assert!(rows.len() >= 20);
    for r in rows {
        let p = compute_properties(&parse_smiles(&r.smiles).unwrap());
        assert!((p.logp - r.logp).abs() <= 0.5, "{} logp {} vs {}", r.name, p.logp, r.logp);
    }
}

#[test]
fn qed_within_tenth() {
    for r in panel() {
        let q = qed(&parse_smiles(&r.smiles).unwrap());
        assert!((q - r.qed).abs() <= 0.1, "{} qed {} vs {}", r.name, q, r.qed);
    }
}

#[test]
fn sa_within_one_unit() {
    let t = FragmentScoreTable::builtin();
    for r in panel() {
        let sa = sa_score(&parse_smiles(&r.smiles).unwrap(), t).unwrap();
        assert!((sa - r.sa).abs() <= 1.0, "{} sa {} vs {}", r.name, sa, r.sa);
        assert!((1.0..=10.0).contains(&sa));
    }
}

#[test]
fn ethanol_is_very_easy() {
    let sa = sa_score(&parse_smiles("CCO").unwrap(), FragmentScoreTable::builtin()).unwrap();
    assert!(sa < 3.0, "{sa}");
}

#[test]
fn frequent_fragments_score_easier() {
    let m = parse_smiles("CC(=O)Nc1ccc(O)cc1").unwrap();
    let ids: Vec<u64> = environment_counts(&m, 2).into_iter().map(|(id, _)| id).collect();
    let common = FragmentScoreTable::from_entries(ids.iter().map(|&id| (id, 2.0)), "common", "-");
    let rare = FragmentScoreTable::from_entries(ids.iter().map(|&id| (id, -2.0)), "rare", "-");
    assert!(sa_score(&m, &common).unwrap() < sa_score(&m, &rare).unwrap());
    // Raising any single contribution never makes the molecule harder.
    let base = FragmentScoreTable::from_entries(ids.iter().map(|&id| (id, 0.0)), "base", "-");
    let s0 = sa_score(&m, &base).unwrap();
    for &bumped in &ids {
        let t = FragmentScoreTable::from_entries(
            ids.iter().map(|&id| (id, if id == bumped { 1.0 } else { 0.0 })),
            "bumped",
            "-",
        );
        assert!(sa_score(&m, &t).unwrap() <= s0);
    }
}

#[test]
fn macrocycle_is_penalised() {
    let t = FragmentScoreTable::builtin();
    let small = sa_breakdown(&parse_smiles("O=C1CCCCC1").unwrap(), t).unwrap();
    let large = sa_breakdown(&parse_smiles("O=C1CCCCCCCCCCCCCCC1").unwrap(), t).unwrap();
    assert_eq!(small.macrocycle_penalty, 0.0);
    assert!(large.macrocycle_penalty > 0.0);
    assert!(large.score > small.score);
}

#[test]
fn rotatable_bonds_lower_qed() {
    let base = compute_properties(&parse_smiles("CC(=O)Nc1ccc(OCC)cc1").unwrap());
    let mut flexible = base;
    flexible.rotb += 10;
    assert!(qed_from_properties(&flexible) < qed_from_properties(&base));
    let chain = compute_properties(&parse_smiles("CC(=O)Nc1ccc(OCCCCCCCCCCCC)cc1").unwrap());
    assert_eq!(chain.rotb, base.rotb + 10);
    assert!(qed_from_properties(&chain) < qed_from_properties(&base));
}

#[test]
fn relabeling_leaves_properties_unchanged() {
    for r in panel() {
        let m = parse_smiles(&r.smiles).unwrap();
        let n = m.atom_count();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        if {
            let mut s = perm.clone();
            s.sort_unstable();
            s.dedup();
            s.len() != n
        } {
            continue;
        }
        let p = m.permuted(&perm);
        let (a, b) = (compute_properties(&m), compute_properties(&p));
        assert_eq!((a.hba, a.hbd, a.rotb, a.arom, a.alerts), (b.hba, b.hbd, b.rotb, b.arom, b.alerts));
        for (x, y) in [(a.mw, b.mw), (a.logp, b.logp), (a.psa, b.psa), (qed(&m), qed(&p))] {
            assert!((x - y).abs() < 1e-9, "{}", r.name);
        }
    }
}
