//! End-to-end training behavior on small synthetic stores.

use kgembed_core::kb::{Triple, TripleStore, Vocabulary};
use kgembed_core::models::{Model, ModelKind, Projection};
use kgembed_core::trainer::{train, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random 200-triple store over 40 entities and 4 relations.
fn random_store(seed: u64) -> TripleStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_e = 40;
    let n_r = 4;
    let entities: Vec<String> = (0..n_e).map(|i| format!("e{i}")).collect();
    let relations: Vec<String> = (0..n_r).map(|i| format!("r{i}")).collect();
    let vocab = Vocabulary::from_names(&entities, &relations).unwrap();
    let mut seen = std::collections::HashSet::new();
    let mut train = Vec::new();
    while train.len() < 200 {
        let t = Triple::new(rng.gen_range(0..n_e), rng.gen_range(0..n_r), rng.gen_range(0..n_e));
        if seen.insert(t) {
            train.push(t);
        }
    }
    TripleStore::new(vocab, train, vec![], vec![]).unwrap()
}

#[test]
fn loss_decreases_over_training() {
    for seed in 0..5u64 {
        let store = random_store(seed);
        let mut model = Model::init(ModelKind::DistMult, 40, 4, 10, Projection::Linear, seed);
        let config = TrainConfig {
            epochs: 50,
            seed,
            ..TrainConfig::default()
        };
        let history = train(&mut model, &store, &config).unwrap();
        assert_eq!(history.len(), 50);
        let first = history.first().unwrap().mean_loss;
        let last = history.last().unwrap().mean_loss;
        assert!(
            last < first,
            "seed {seed}: loss did not decrease ({first} -> {last})"
        );
    }
}

#[test]
fn entity_norms_stay_unit_during_training() {
    let store = random_store(9);
    for kind in [ModelKind::TransE, ModelKind::Bilinear, ModelKind::Ntn] {
        let mut model = Model::init(kind, 40, 4, 6, Projection::Linear, 1);
        let config = TrainConfig { epochs: 5, ..TrainConfig::default() };
        train(&mut model, &store, &config).unwrap();
        for row in model.entity_table().rows() {
            let norm = row.dot(&row).sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "{kind:?}: norm {norm}");
        }
    }
}

#[test]
fn validation_mrr_is_recorded_when_requested() {
    let store = {
        let entities: Vec<String> = (0..10).map(|i| format!("e{i}")).collect();
        let vocab = Vocabulary::from_names(&entities, &["r".to_string()]).unwrap();
        let train: Vec<Triple> = (0..8).map(|i| Triple::new(i, 0, (i + 1) % 10)).collect();
        let valid = vec![Triple::new(8, 0, 9), Triple::new(9, 0, 0)];
        TripleStore::new(vocab, train, valid, vec![]).unwrap()
    };
    let mut model = Model::init(ModelKind::DistMult, 10, 1, 4, Projection::Linear, 2);
    let config = TrainConfig {
        epochs: 4,
        valid_mrr_every: Some(2),
        ..TrainConfig::default()
    };
    let history = train(&mut model, &store, &config).unwrap();
    assert!(history[0].valid_mrr.is_none());
    assert!(history[1].valid_mrr.is_some());
    assert!(history[3].valid_mrr.is_some());
    let mrr = history[3].valid_mrr.unwrap();
    assert!(mrr > 0.0 && mrr <= 1.0);
}
