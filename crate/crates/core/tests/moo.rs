use covgen::moo::{
    policy_gradient, policy_gradient_update, rank_population, rl_train, select_by_reward, select_episodes, MooError,
    RlConfig,
};
use covgen::neural::{GeneratorArch, GeneratorModel, Sgd, SgdConfig, TokenSequence, Vocabulary};
use covgen::scorers::{default_scorer, RawSource, ScorerKind, ScorerRegistry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generator() -> GeneratorModel {
    let vocab = Vocabulary::from_smiles(["C=CC(=O)Nc1ccccc1", "CCO", "CCN(C)C"]);
    GeneratorModel::new(vocab, GeneratorArch { embed: 6, hidden: 12, max_len: 30 }, 2)
}

fn episodes(g: &GeneratorModel, rewards: &[f64]) -> Vec<(TokenSequence, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    g.sample(rewards.len(), 1.0, &mut rng).into_iter().zip(rewards.iter().copied()).collect()
}

#[test]
fn policy_gradient_is_linear_in_rewards() {
    let g = generator();
    let full = episodes(&g, &[0.8, 0.2, 0.6, 1.0]);
    let half: Vec<_> = full.iter().map(|(s, r)| (s.clone(), r / 2.0)).collect();
    let (j1, g1) = policy_gradient(&g, &full).unwrap();
    let (j2, g2) = policy_gradient(&g, &half).unwrap();
    assert!((j1 - 2.0 * j2).abs() < 1e-12);
    for (a, b) in g1.iter().zip(&g2) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - 2.0 * y).abs() < 1e-12);
        }
    }
}

#[test]
fn policy_gradient_rejects_bad_input() {
    let g = generator();
    assert_eq!(policy_gradient(&g, &[]).unwrap_err(), MooError::EmptyEpisodes);
    assert_eq!(policy_gradient(&g, &episodes(&g, &[0.5, 1.5])).unwrap_err(), MooError::RewardRange(1.5));
}

#[test]
fn zero_rewards_leave_parameters_unchanged() {
    let mut g = generator();
    let before = g.clone();
    let mut opt = Sgd::new(SgdConfig { learning_rate: 0.5, momentum: 0.9, clip_norm: 5.0 }, &g.params);
    let eps = episodes(&g, &[0.0, 0.0, 0.0]);
    policy_gradient_update(&mut g, &mut opt, &eps).unwrap();
    assert_eq!(g.params, before.params);
    let eps = episodes(&g, &[1.0, 0.5, 0.0]);
    policy_gradient_update(&mut g, &mut opt, &eps).unwrap();
    assert_ne!(g.params, before.params);
}

#[test]
fn selection_prefers_front_then_reward() {
    let points = vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.2, 0.2], vec![0.5, 0.5], vec![0.0, 0.0]];
    let ids = ["a", "b", "c", "d", "e"];
    let ranking = rank_population(&points).unwrap();
    let mut top = select_episodes(&ranking, &ids, 0.6);
    top.sort_unstable();
    assert_eq!(top, [0, 1, 3]);
    let mut best = select_by_reward(&[0.1, 0.9, 0.5, 0.7, 0.3], &ids, 0.4);
    best.sort_unstable();
    assert_eq!(best, [1, 3]);
}

fn registry() -> ScorerRegistry {
    let mut reg = ScorerRegistry::new();
    reg.push(default_scorer(ScorerKind::Validity), RawSource::Validity).unwrap();
    let mut motif = default_scorer(ScorerKind::Motif);
    motif.name = "acrylamide".into();
    reg.push(motif, RawSource::motif("C=CC(=O)N").unwrap()).unwrap();
    reg
}

#[test]
fn rl_train_is_seeded_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RlConfig { iterations: 3, batch_size: 24, checkpoint_every: 2, seed: 4, ..RlConfig::default() };
    let reg = registry();
    let mut a = generator();
    let reports = rl_train(&mut a, &reg, &cfg, Some(dir.path())).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r.selected == 12 && (0.0..=1.0).contains(&r.mean_reward)));
    assert!(dir.path().join("rl_iter0002.ckpt").exists());
    assert!(!dir.path().join("rl_iter0003.ckpt").exists());
    let mut b = generator();
    assert_eq!(rl_train(&mut b, &reg, &cfg, None).unwrap(), reports);
    assert_eq!(a.params, b.params);

    let mut c = generator();
    let by_reward = RlConfig { crowding: false, ..cfg };
    assert_eq!(rl_train(&mut c, &reg, &by_reward, None).unwrap().len(), 3);
}

#[test]
fn rl_train_needs_active_scorers() {
    let mut g = generator();
    let err = rl_train(&mut g, &ScorerRegistry::new(), &RlConfig::default(), None).unwrap_err();
    assert!(matches!(err, MooError::Scoring { iteration: 0, .. }));
}
