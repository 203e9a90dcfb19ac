//! Closed-path Horn rule mining from relation embeddings.
//!
//! A rule `B1(a,b) ∧ B2(b,c) ⇒ H(a,c)` is scored by the distance between
//! the head's relation embedding and the composition of the body embeddings
//! (addition for vectors, matrix product for matrices). Candidate bodies are
//! restricted by argument-domain overlap, ranked per head by distance,
//! thresholded globally and by the largest-gap heuristic, then scored by
//! confidence over training instantiations.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::bitset::Bitset;
use crate::kb::{RelationDomains, Triple, TripleStore};
use crate::models::{relation_distance, Model, ModelError};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("gap cutoff requires a non-empty distance list")]
    EmptyDistances,
    #[error("rule has no predictions; confidence is undefined")]
    UndefinedConfidence,
    #[error("unsupported body length {0}; only 2 and 3 are searched")]
    UnsupportedLength(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A scored candidate rule: body sequence, head, embedding distance, and
/// confidence statistics over training data.
#[derive(Clone, Debug)]
pub struct RuleCandidate {
    pub head: usize,
    pub body: Vec<usize>,
    pub distance: f64,
    /// Predictions whose head triple is present in training data.
    pub support: usize,
    /// Distinct endpoint pairs produced by instantiating the body.
    pub n_predictions: usize,
    pub confidence: f64,
}

/// A triple derived from an instantiated rule, with the first witnessing
/// body path retained as provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub head: usize,
    pub subject: usize,
    pub object: usize,
    /// Entities a_1 ... a_{n+1} of the first path found.
    pub path: Vec<usize>,
}

impl Prediction {
    pub fn triple(&self) -> Triple {
        Triple::new(self.subject, self.head, self.object)
    }
}

/// Precomputed relation-level overlap tables driving sequence search.
///
/// All bitsets are over relation ids: `follows[p]` holds every q with
/// Y_p ∩ X_q ≠ ∅, `subject_overlap[r]` every p with X_p ∩ X_r ≠ ∅, and
/// `object_overlap[r]` every q with Y_q ∩ Y_r ≠ ∅. Excluded relations are
/// absent from every table.
pub struct SequenceIndex {
    n_relations: usize,
    present: Vec<bool>,
    follows: Vec<Bitset>,
    subject_overlap: Vec<Bitset>,
    object_overlap: Vec<Bitset>,
}

impl SequenceIndex {
    pub fn build(domains: &RelationDomains, excluded: &HashSet<usize>) -> SequenceIndex {
        let n_r = domains.n_relations();
        let present: Vec<bool> = (0..n_r)
            .map(|r| domains.contains_relation(r) && !excluded.contains(&r))
            .collect();
        let mut follows = vec![Bitset::new(n_r); n_r];
        let mut subject_overlap = vec![Bitset::new(n_r); n_r];
        let mut object_overlap = vec![Bitset::new(n_r); n_r];
        for p in 0..n_r {
            if !present[p] {
                continue;
            }
            for q in 0..n_r {
                if !present[q] {
                    continue;
                }
                if domains.object_domain(p).intersects(domains.subject_domain(q)) {
                    follows[p].insert(q);
                }
                if domains.subject_domain(p).intersects(domains.subject_domain(q)) {
                    subject_overlap[q].insert(p);
                }
                if domains.object_domain(p).intersects(domains.object_domain(q)) {
                    object_overlap[q].insert(p);
                }
            }
        }
        SequenceIndex {
            n_relations: n_r,
            present,
            follows,
            subject_overlap,
            object_overlap,
        }
    }

    /// Heads eligible for rule search.
    pub fn heads(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_relations).filter(|&r| self.present[r])
    }

    /// All type-consistent body sequences of length `n` for `head`:
    /// the first relation's subject domain overlaps the head's, the last
    /// relation's object domain overlaps the head's, consecutive relations
    /// chain through a shared entity, and all relation types are distinct
    /// from each other and from the head.
    pub fn sequences(&self, head: usize, n: usize) -> Result<Vec<Vec<usize>>, RuleError> {
        if !(2..=3).contains(&n) {
            return Err(RuleError::UnsupportedLength(n));
        }
        let mut out = Vec::new();
        if !self.present[head] {
            return Ok(out);
        }
        for first in self.subject_overlap[head].iter() {
            if first == head {
                continue;
            }
            match n {
                2 => {
                    for last in self.follows[first].iter() {
                        if last == head || last == first {
                            continue;
                        }
                        if self.object_overlap[head].contains(last) {
                            out.push(vec![first, last]);
                        }
                    }
                }
                3 => {
                    for mid in self.follows[first].iter() {
                        if mid == head || mid == first {
                            continue;
                        }
                        for last in self.follows[mid].iter() {
                            if last == head || last == first || last == mid {
                                continue;
                            }
                            if self.object_overlap[head].contains(last) {
                                out.push(vec![first, mid, last]);
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        Ok(out)
    }
}

/// Enumerates type-consistent body sequences for one head relation.
pub fn enumerate_sequences(
    domains: &RelationDomains,
    head: usize,
    n: usize,
) -> Result<Vec<Vec<usize>>, RuleError> {
    SequenceIndex::build(domains, &HashSet::new()).sequences(head, n)
}

/// Largest-gap cutoff over an ascending distance list: returns the number of
/// elements to keep, i.e. the index j maximizing d_{j+1} - d_j (1-based,
/// smallest j on ties). A singleton list keeps its only element.
pub fn gap_cutoff(distances: &[f64]) -> Result<usize, RuleError> {
    if distances.is_empty() {
        return Err(RuleError::EmptyDistances);
    }
    if distances.len() == 1 {
        return Ok(1);
    }
    debug_assert!(distances.windows(2).all(|w| w[0] <= w[1]), "distances must ascend");
    let mut best_j = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for j in 1..distances.len() {
        let gap = distances[j] - distances[j - 1];
        if gap > best_gap {
            best_gap = gap;
            best_j = j;
        }
    }
    Ok(best_j)
}

/// Body sequences for `head` ranked by ascending distance between the
/// composed body embedding and the head embedding. Ties are broken by the
/// body's id sequence so the ordering is total.
pub fn rank_sequences(
    model: &Model,
    index: &SequenceIndex,
    head: usize,
    n: usize,
) -> Result<Vec<(Vec<usize>, f64)>, RuleError> {
    let head_embedding = model.relation_embedding(head)?;
    let mut scored = Vec::new();
    for body in index.sequences(head, n)? {
        let composed = model.compose_relations(&body)?;
        let distance = relation_distance(&head_embedding, &composed)?;
        scored.push((body, distance));
    }
    scored.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(scored)
}

/// Adjacency of training triples grouped by relation then subject, for path
/// joins.
pub struct TrainAdjacency {
    by_relation: Vec<HashMap<usize, Vec<usize>>>,
}

impl TrainAdjacency {
    pub fn build(store: &TripleStore) -> TrainAdjacency {
        let mut by_relation: Vec<HashMap<usize, Vec<usize>>> =
            vec![HashMap::new(); store.n_relations()];
        for t in store.train() {
            by_relation[t.relation].entry(t.subject).or_default().push(t.object);
        }
        for rel in &mut by_relation {
            for objects in rel.values_mut() {
                objects.sort_unstable();
            }
        }
        TrainAdjacency { by_relation }
    }

    fn edges(&self, relation: usize) -> &HashMap<usize, Vec<usize>> {
        &self.by_relation[relation]
    }
}

/// Instantiates a rule body over training triples and emits one prediction
/// per distinct endpoint pair, sorted by (subject, object). The first
/// witnessing path is kept as provenance.
pub fn instantiate_rule(
    head: usize,
    body: &[usize],
    adjacency: &TrainAdjacency,
) -> Result<Vec<Prediction>, RuleError> {
    if !(2..=3).contains(&body.len()) {
        return Err(RuleError::UnsupportedLength(body.len()));
    }
    let mut by_endpoints: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let first_edges = adjacency.edges(body[0]);
    let mut starts: Vec<&usize> = first_edges.keys().collect();
    starts.sort_unstable();
    for &a1 in starts {
        for &a2 in &first_edges[&a1] {
            let Some(mids) = adjacency.edges(body[1]).get(&a2) else {
                continue;
            };
            for &a3 in mids {
                if body.len() == 2 {
                    by_endpoints.entry((a1, a3)).or_insert_with(|| vec![a1, a2, a3]);
                } else {
                    let Some(ends) = adjacency.edges(body[2]).get(&a3) else {
                        continue;
                    };
                    for &a4 in ends {
                        by_endpoints.entry((a1, a4)).or_insert_with(|| vec![a1, a2, a3, a4]);
                    }
                }
            }
        }
    }
    let mut predictions: Vec<Prediction> = by_endpoints
        .into_iter()
        .map(|((subject, object), path)| Prediction {
            head,
            subject,
            object,
            path,
        })
        .collect();
    predictions.sort_by_key(|p| (p.subject, p.object));
    Ok(predictions)
}

/// Ratio of predictions whose head triple holds in training data. A rule
/// with no predictions has undefined confidence.
pub fn confidence(
    head: usize,
    body: &[usize],
    store: &TripleStore,
    adjacency: &TrainAdjacency,
) -> Result<f64, RuleError> {
    let predictions = instantiate_rule(head, body, adjacency)?;
    if predictions.is_empty() {
        return Err(RuleError::UndefinedConfidence);
    }
    let correct = predictions
        .iter()
        .filter(|p| store.in_split(&p.triple(), crate::kb::Split::Train))
        .count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Mining parameters: nearest-neighbor count, global distance threshold,
/// body lengths to search, and relations excluded from search entirely.
#[derive(Clone, Debug)]
pub struct MiningConfig {
    pub k: usize,
    pub delta: f64,
    pub lengths: Vec<usize>,
    pub excluded: HashSet<usize>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            k: 100,
            delta: f64::INFINITY,
            lengths: vec![2],
            excluded: HashSet::new(),
        }
    }
}

/// Mines rule candidates for every eligible head relation.
///
/// Per head and body length: enumerate type-consistent sequences, rank by
/// composition distance, keep the K nearest, drop those beyond `delta`,
/// apply the largest-gap cutoff, then instantiate the survivors and compute
/// confidence. Rules with zero predictions are dropped. The final list is
/// sorted by decreasing confidence (ties by ascending distance, head, body).
pub fn embed_rule(
    model: &Model,
    store: &TripleStore,
    domains: &RelationDomains,
    config: &MiningConfig,
) -> Result<Vec<RuleCandidate>, RuleError> {
    if !model.kind().supports_composition() {
        return Err(RuleError::Model(ModelError::UnsupportedComposition {
            kind: model.kind().name(),
        }));
    }
    let index = SequenceIndex::build(domains, &config.excluded);
    let adjacency = TrainAdjacency::build(store);
    let mut candidates = Vec::new();
    for head in index.heads() {
        for &length in &config.lengths {
            let mut ranked = rank_sequences(model, &index, head, length)?;
            ranked.truncate(config.k);
            ranked.retain(|(_, d)| *d <= config.delta);
            if ranked.is_empty() {
                continue;
            }
            let distances: Vec<f64> = ranked.iter().map(|(_, d)| *d).collect();
            let keep = gap_cutoff(&distances)?;
            ranked.truncate(keep);
            for (body, distance) in ranked {
                let predictions = instantiate_rule(head, &body, &adjacency)?;
                if predictions.is_empty() {
                    continue;
                }
                let support = predictions
                    .iter()
                    .filter(|p| store.in_split(&p.triple(), crate::kb::Split::Train))
                    .count();
                candidates.push(RuleCandidate {
                    head,
                    body,
                    distance,
                    support,
                    n_predictions: predictions.len(),
                    confidence: support as f64 / predictions.len() as f64,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.distance.partial_cmp(&b.distance).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| a.head.cmp(&b.head))
            .then_with(|| a.body.cmp(&b.body))
    });
    Ok(candidates)
}

/// One point of an aggregated precision curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionPoint {
    /// Cumulative distinct unseen predictions after this rule.
    pub predictions: usize,
    /// Fraction of the pool present in the test split.
    pub precision: f64,
}

/// Walks rules in the given (confidence-sorted) order, pooling each rule's
/// unseen predictions (not in train ∪ valid, deduplicated) and emitting a
/// point whenever the pool grows. Precision is the fraction of pooled
/// predictions found in the test split. Stops once the pool exceeds `cap`.
pub fn precision_curve(
    rules: &[RuleCandidate],
    store: &TripleStore,
    adjacency: &TrainAdjacency,
    cap: usize,
) -> Result<Vec<PrecisionPoint>, RuleError> {
    let mut pool: HashSet<Triple> = HashSet::new();
    let mut hits = 0usize;
    let mut points = Vec::new();
    for rule in rules {
        let predictions = instantiate_rule(rule.head, &rule.body, adjacency)?;
        let before = pool.len();
        for p in predictions {
            let t = p.triple();
            if store.in_split(&t, crate::kb::Split::Train)
                || store.in_split(&t, crate::kb::Split::Valid)
            {
                continue;
            }
            if pool.insert(t) && store.in_split(&t, crate::kb::Split::Test) {
                hits += 1;
            }
        }
        if pool.len() > before {
            points.push(PrecisionPoint {
                predictions: pool.len(),
                precision: hits as f64 / pool.len() as f64,
            });
        }
        if pool.len() > cap {
            break;
        }
    }
    Ok(points)
}

/// Default distance threshold presets for length-2 and length-3 searches,
/// keyed on model kind and entity projection.
pub fn default_delta(model: &Model, length: usize) -> Option<f64> {
    use crate::models::{ModelKind, Projection};
    match (model.kind(), model.projection(), length) {
        (ModelKind::DistMult, Projection::Tanh, 2) => Some(9.2),
        (ModelKind::DistMult, Projection::Linear, 2) => Some(36.3),
        (ModelKind::Bilinear, _, 2) => Some(1.9),
        (ModelKind::TransE, _, 2) => Some(3.4),
        (ModelKind::DistMult, Projection::Tanh, 3) => Some(9.1),
        (ModelKind::DistMult, Projection::Linear, 3) => Some(48.8),
        (ModelKind::Bilinear, _, 3) => Some(2.9),
        (ModelKind::TransE, _, 3) => Some(1.1),
        _ => None,
    }
}
