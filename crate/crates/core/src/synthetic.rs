//! Synthetic knowledge bases with planted compositional structure, used by
//! the end-to-end learning and rule-recovery test suites.
//!
//! Each planted rule occupies its own block of entities split into three
//! groups A, B, C. Body relations connect A→B and B→C as random sparse
//! bipartite graphs; the head relation holds exactly the composed A→C pairs.
//! Distractor relations add random edges over the whole entity pool. A
//! fraction of each head relation is held out as the test split.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kb::{Triple, TripleStore, Vocabulary};

/// A planted length-2 rule: `body[0](a,b) ∧ body[1](b,c) ⇒ head(a,c)`.
#[derive(Clone, Debug)]
pub struct PlantedRule {
    pub body: Vec<usize>,
    pub head: usize,
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    /// Number of planted rule blocks (each contributes 3 relations).
    pub rules: usize,
    /// Entities per group; each rule block uses 3 groups.
    pub group_size: usize,
    /// Outgoing edges per source entity in body relations.
    pub out_degree: usize,
    /// Extra relations with random edges over the whole pool.
    pub distractor_relations: usize,
    /// Random edges per distractor relation.
    pub distractor_edges: usize,
    /// Fraction of each head relation's facts moved to the test split.
    pub holdout_fraction: f64,
}

impl GeneratorConfig {
    /// One planted rule over 300 entities, ~3k facts.
    pub fn single_rule() -> Self {
        GeneratorConfig {
            rules: 1,
            group_size: 100,
            out_degree: 5,
            distractor_relations: 0,
            distractor_edges: 0,
            holdout_fraction: 0.1,
        }
    }

    /// Five planted rules over 300 entities plus 20 distractor relations.
    pub fn five_rules_with_distractors() -> Self {
        GeneratorConfig {
            rules: 5,
            group_size: 20,
            out_degree: 3,
            distractor_relations: 20,
            distractor_edges: 100,
            holdout_fraction: 0.1,
        }
    }
}

/// Generates a knowledge base with planted compositional rules.
pub fn composition_kb(config: &GeneratorConfig, seed: u64) -> (TripleStore, Vec<PlantedRule>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entities = config.rules * 3 * config.group_size;
    let entities: Vec<String> = (0..n_entities).map(|i| format!("e{i}")).collect();
    let mut relations = Vec::new();
    for i in 0..config.rules {
        relations.push(format!("body{i}_first"));
        relations.push(format!("body{i}_second"));
        relations.push(format!("head{i}"));
    }
    for j in 0..config.distractor_relations {
        relations.push(format!("noise{j}"));
    }
    let vocab = Vocabulary::from_names(&entities, &relations).unwrap();

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut planted = Vec::new();
    for i in 0..config.rules {
        let base = i * 3 * config.group_size;
        let group_a: Vec<usize> = (base..base + config.group_size).collect();
        let group_b: Vec<usize> =
            (base + config.group_size..base + 2 * config.group_size).collect();
        let group_c: Vec<usize> =
            (base + 2 * config.group_size..base + 3 * config.group_size).collect();
        let first_rel = 3 * i;
        let second_rel = 3 * i + 1;
        let head_rel = 3 * i + 2;
        planted.push(PlantedRule {
            body: vec![first_rel, second_rel],
            head: head_rel,
        });

        let first_edges = bipartite(&group_a, &group_b, config.out_degree, &mut rng);
        let second_edges = bipartite(&group_b, &group_c, config.out_degree, &mut rng);
        for &(a, b) in &first_edges {
            train.push(Triple::new(a, first_rel, b));
        }
        for &(b, c) in &second_edges {
            train.push(Triple::new(b, second_rel, c));
        }

        // head = exact composition of the two body relations
        let mut head_facts: Vec<Triple> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &first_edges {
            for &(b2, c) in &second_edges {
                if b2 == b && seen.insert((a, c)) {
                    head_facts.push(Triple::new(a, head_rel, c));
                }
            }
        }
        head_facts.shuffle(&mut rng);
        let n_test = (head_facts.len() as f64 * config.holdout_fraction).floor() as usize;
        // keep at least one head fact in train so the relation has domains
        let n_test = n_test.min(head_facts.len().saturating_sub(1));
        for (idx, fact) in head_facts.into_iter().enumerate() {
            if idx < n_test {
                test.push(fact);
            } else {
                train.push(fact);
            }
        }
    }

    let n_planted_relations = 3 * config.rules;
    for j in 0..config.distractor_relations {
        let rel = n_planted_relations + j;
        let mut seen = std::collections::HashSet::new();
        let mut added = 0;
        while added < config.distractor_edges {
            let s = rng.gen_range(0..n_entities);
            let o = rng.gen_range(0..n_entities);
            if s != o && seen.insert((s, o)) {
                train.push(Triple::new(s, rel, o));
                added += 1;
            }
        }
    }

    let store = TripleStore::new(vocab, train, vec![], test).unwrap();
    (store, planted)
}

/// Random bipartite edge set: each source gets `out_degree` distinct targets.
fn bipartite(
    sources: &[usize],
    targets: &[usize],
    out_degree: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(sources.len() * out_degree);
    for &s in sources {
        let mut chosen: Vec<usize> = targets.to_vec();
        chosen.shuffle(rng);
        chosen.truncate(out_degree.min(targets.len()));
        for t in chosen {
            edges.push((s, t));
        }
    }
    edges
}
