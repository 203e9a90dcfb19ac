//! Scratch probe for planted-rule learning quality (not shipped behavior).

use kgembed_core::eval::{evaluate, RankMode};
use kgembed_core::kb::Split;
use kgembed_core::models::{Model, ModelKind, Projection};
use kgembed_core::rules::{rank_sequences, SequenceIndex};
use kgembed_core::synthetic::{composition_kb, GeneratorConfig};
use kgembed_core::trainer::{train, TrainConfig};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    // criterion-4 shape: single planted rule, DistMult d=20, 200 epochs
    for seed in 0..5u64 {
        let (store, planted) = composition_kb(&GeneratorConfig::single_rule(), seed);
        let mut model = Model::init(
            ModelKind::DistMult,
            store.n_entities(),
            store.n_relations(),
            20,
            Projection::Linear,
            seed,
        );
        let config = TrainConfig { epochs: 200, seed, ..TrainConfig::default() };
        let start = Instant::now();
        let history = train(&mut model, &store, &config).unwrap();
        let report = evaluate(&model, &store, Split::Test, RankMode::Filtered);
        println!(
            "seed {seed}: triples={} test={} hits@10={:.1} mrr={:.3} first_loss={:.4} last_loss={:.4} train_time={:?} head={}",
            store.n_triples(),
            store.test().len(),
            report.hits_at_10,
            report.mrr,
            history.first().unwrap().mean_loss,
            history.last().unwrap().mean_loss,
            start.elapsed(),
            planted[0].head,
        );
    }
    println!("criterion-4 probe total: {:?}", t0.elapsed());

    // criterion-5 shape: 5 planted rules + 20 distractors, DistMult + Bilinear
    for kind in [ModelKind::DistMult, ModelKind::Bilinear] {
        for seed in 0..5u64 {
            let (store, planted) =
                composition_kb(&GeneratorConfig::five_rules_with_distractors(), 100 + seed);
            let mut model = Model::init(
                kind,
                store.n_entities(),
                store.n_relations(),
                20,
                Projection::Linear,
                seed,
            );
            let config = TrainConfig { epochs: 150, seed, ..TrainConfig::default() };
            let start = Instant::now();
            train(&mut model, &store, &config).unwrap();
            let domains = kgembed_core::compute_domains(&store);
            let index = SequenceIndex::build(&domains, &Default::default());
            let mut found = 0;
            let mut ranks = Vec::new();
            for rule in &planted {
                let ranked = rank_sequences(&model, &index, rule.head, 2).unwrap();
                let pos = ranked.iter().position(|(body, _)| body == &rule.body);
                ranks.push(pos.map(|p| p + 1));
                if pos.map(|p| p < 3).unwrap_or(false) {
                    found += 1;
                }
            }
            println!(
                "{kind:?} seed {seed}: {found}/5 in top-3, ranks {ranks:?}, n_seq(head0)={}, time={:?}",
                index.sequences(planted[0].head, 2).unwrap().len(),
                start.elapsed()
            );
        }
    }
    println!("total: {:?}", t0.elapsed());
}
