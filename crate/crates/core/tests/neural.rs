use covgen::chem::{parse_smiles, Element};
use covgen::neural::{
    balanced_subsample, train_graph_classifier, GeneratorArch, GeneratorModel, GraphArch, GraphModel,
    GraphTrainConfig, HeadKind, Label, LayerKind, Vocabulary,
};
use covgen::synthetic::toy_corpus;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generator() -> GeneratorModel {
    let vocab = Vocabulary::from_smiles(["CC(=O)Nc1ccccc1", "C=CC#N", "OCCCl", "C1CCNC1"]);
    GeneratorModel::new(vocab, GeneratorArch { embed: 8, hidden: 16, max_len: 40 }, 9)
}

#[test]
fn sampled_log_probs_match_teacher_forcing() {
    let g = generator();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seqs = g.sample(50, 1.0, &mut rng);
    let forced = g.sequence_log_probs(&seqs);
    for (s, f) in seqs.iter().zip(forced) {
        assert!((s.log_prob() - f).abs() < 1e-9, "{} vs {f}", s.log_prob());
        assert!(s.steps() <= 41);
    }
}

#[test]
fn generator_checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.ckpt");
    let g = generator();
    g.save(&path).unwrap();
    let back = GeneratorModel::load(&path).unwrap();
    let draw = |m: &GeneratorModel| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        m.sample(20, 0.8, &mut rng).iter().map(|s| m.smiles(s)).collect::<Vec<_>>()
    };
    assert_eq!(draw(&g), draw(&back));
    assert!(GeneratorModel::load(&dir.path().join("missing.ckpt")).is_err());
}

#[test]
fn graph_predictions_ignore_atom_order() {
    let m = parse_smiles("C=CC(=O)Nc1ccc(Cl)cc1OC").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [LayerKind::Gcn, LayerKind::Attention, LayerKind::Deep] {
        for head in [HeadKind::Binary, HeadKind::Multiclass, HeadKind::Regression] {
            let model = GraphModel::new(GraphArch { kind, head, classes: 3, hidden: 8, ..GraphArch::default() }, 5).unwrap();
            let base = model.predict(&m).unwrap();
            let mut perm: Vec<usize> = (0..m.atom_count()).collect();
            perm.shuffle(&mut rng);
            let moved = model.predict(&m.permuted(&perm)).unwrap();
            for (a, b) in base.iter().zip(&moved) {
                assert!((a - b).abs() < 1e-9, "{kind:?}/{head:?}: {base:?} vs {moved:?}");
            }
        }
    }
}

#[test]
fn graph_checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let arch = GraphArch { kind: LayerKind::Attention, head: HeadKind::Multiclass, classes: 4, ..GraphArch::default() };
    let model = GraphModel::new(arch, 2).unwrap();
    model.save(&path).unwrap();
    let back = GraphModel::load(&path).unwrap();
    let m = parse_smiles("CS(=O)(=O)c1ccncc1").unwrap();
    // Weights are stored as f32.
    for (a, b) in model.predict(&m).unwrap().iter().zip(back.predict(&m).unwrap()) {
        assert!((a - b).abs() < 1e-6);
    }
    let again = dir.path().join("again.ckpt");
    back.save(&again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    assert_eq!(GraphModel::load(&again).unwrap().predict(&m).unwrap(), back.predict(&m).unwrap());
    let p = back.predict(&m).unwrap();
    assert_eq!(p.len(), 4);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn balanced_subsample_keeps_minority() {
    let labels: Vec<usize> = (0..400).map(|i| usize::from(i % 4 == 0)).collect();
    let keep = balanced_subsample(&labels, 1).unwrap();
    assert_eq!(keep.len(), 200);
    assert_eq!(keep.iter().filter(|&&i| labels[i] == 1).count(), 100);
    assert!(keep.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(keep, balanced_subsample(&labels, 1).unwrap());
    assert!(balanced_subsample(&[0, 0, 0], 1).is_err());
}

#[test]
fn regression_training_reduces_loss() {
    let data: Vec<_> = toy_corpus(120, 0.5, 8)
        .into_iter()
        .map(|t| {
            let m = parse_smiles(&t.smiles).unwrap();
            // Mean pooling sees composition, not size.
            let hetero = m.atoms().iter().filter(|a| a.element != Element::C).count();
            let y = hetero as f64 / m.atom_count() as f64;
            (m, Label::Value(y))
        })
        .collect();
    let mut cfg = GraphTrainConfig { epochs: 30, ..GraphTrainConfig::default() };
    cfg.arch.head = HeadKind::Regression;
    cfg.arch.hidden = 16;
    let (_, report) = train_graph_classifier(&data, &cfg).unwrap();
    let first = report.epochs.first().unwrap().train_loss;
    let last = report.epochs.last().unwrap().train_loss;
    assert!(last < 0.5 * first, "loss {first} -> {last}");
    assert_eq!(report.train_size + report.holdout_size, 120);
}
