use covgen::chem::{parse_smiles, Fingerprint};
use covgen::evalkit::{
    project_chemical_space, rediscovery_rate, volume_sweep, warhead_distance, EvalError, GenerationRun, PoseFile,
};
use covgen::neural::AttributionMap;
use std::collections::HashSet;

#[test]
fn pose_parsing_and_warhead_distance() {
    let m = parse_smiles("C=CC(=O)N").unwrap();
    let text = "# docked\nlig1 CYS797 0 0 0\n2 0 3 4\n0 0 0 10\n1 6 8 0 # beta carbon\n3 1 0 0\n4 0 0 2\n";
    let pose = PoseFile::parse(text).unwrap();
    assert_eq!(pose.residue, "CYS797");
    assert_eq!(pose.coords[1], [6.0, 8.0, 0.0]);
    let att = AttributionMap::from_raw(vec![1.0, 0.9, 0.8, 0.0, 0.1]);
    assert_eq!(att.tagged, [0, 1, 2]);
    assert_eq!(warhead_distance(&m, &att, &pose).unwrap(), 5.0);
    let none = AttributionMap::from_raw(vec![0.0; 5]);
    assert_eq!(warhead_distance(&m, &none, &pose).unwrap_err(), EvalError::NoWarhead);

    let gap = "lig1 CYS797 0 0 0\n0 0 0 0\n2 0 0 0\n";
    assert!(matches!(PoseFile::parse(gap), Err(EvalError::Pose { line: 3, .. })));
    assert!(matches!(PoseFile::parse("lig1 CYS 0 0\n"), Err(EvalError::Pose { line: 1, .. })));
    let short = PoseFile::parse("lig1 CYS 0 0 0\n0 1 1 1\n").unwrap();
    assert!(matches!(warhead_distance(&m, &att, &short), Err(EvalError::AtomCountMismatch { .. })));
}

#[test]
fn two_point_projection_matches_closed_form() {
    // Two fingerprints differing in h bits sit at +-sqrt(h)/2 on the first axis.
    let a = Fingerprint::from_bits(64, [1, 2, 3, 10]);
    let b = Fingerprint::from_bits(64, [1, 5, 6, 7, 8]);
    let h = 7.0f64;
    let p = project_chemical_space(&[a, b], 2).unwrap();
    assert!((p.coords[0][0].abs() - h.sqrt() / 2.0).abs() < 1e-9);
    assert!((p.coords[0][0] + p.coords[1][0]).abs() < 1e-9);
    assert!((p.variances[0] - h / 2.0).abs() < 1e-9);
    assert_eq!(p.variances[1], 0.0);
    assert!(p.residuals[0].abs() < 1e-9);
    assert_eq!(project_chemical_space(&[Fingerprint::empty(64)], 2).unwrap_err(), EvalError::TooFewMolecules(1));
}

#[test]
fn projection_variances_descend() {
    let fps: Vec<Fingerprint> = (0..12).map(|i| Fingerprint::from_bits(32, (0..32).filter(|b| (b * 7 + i * 3) % 5 < 2))).collect();
    let p = project_chemical_space(&fps, 3).unwrap();
    assert!(p.variances.windows(2).all(|w| w[0] >= w[1] - 1e-9));
    assert!(p.residuals.windows(2).all(|w| w[0] >= w[1] - 1e-9));
    for c in 0..3 {
        let mean: f64 = p.coords.iter().map(|r| r[c]).sum::<f64>() / 12.0;
        assert!(mean.abs() < 1e-9);
    }
}

#[test]
fn volume_sweep_uses_prefixes() {
    let run = GenerationRun::parse_csv(
        "r",
        "egfr-1",
        "smiles,desirable\nCCO,true\nCCN,true\nOCC,true\nCCCl,false\nCC(C)O,true\n",
    )
    .unwrap();
    let reference: HashSet<String> = ["CCO", "CCCl", "CC(C)O"]
        .iter()
        .map(|s| covgen::chem::canonicalize(&parse_smiles(s).unwrap()))
        .collect();
    let full = rediscovery_rate(&run, &reference);
    assert_eq!((full.counts.desirable, full.rediscovered), (4, 2));
    assert_eq!(full.rate_percent, Some(50.0));
    let sweep = volume_sweep(&run, &[1, 3, 5], &reference).unwrap();
    let hits: Vec<usize> = sweep.iter().map(|r| r.rediscovery.rediscovered).collect();
    assert_eq!(hits, [1, 1, 2]);
    assert!(volume_sweep(&run, &[3, 1], &reference).is_err());
    assert!(GenerationRun::parse_csv("r", "p", "smiles,desirable\nCCO,maybe\n").is_err());
}
