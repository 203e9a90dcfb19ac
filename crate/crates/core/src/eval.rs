//! Entity-ranking evaluation: MRR, HITS@10, per-category breakdowns, and
//! type-checked mean average precision.
//!
//! For every held-out triple both arguments are predicted in turn: all
//! entities are scored in the open slot and the true entity's rank is
//! counted pessimistically (equal-scored candidates rank ahead of it, so a
//! constant-score model gains nothing from ties). Raw and filtered ranks are
//! computed in a single scoring pass; filtered ranking discards candidates
//! that form a known-true triple in any split.

use ndarray::Array2;

use crate::kb::{
    classify_relations, RelationCategory, RelationDomains, Split, Triple, TripleStore,
};
use crate::models::{Model, Slot};

/// Which ranking protocol a metric was computed under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMode {
    Raw,
    Filtered,
}

impl RankMode {
    pub fn name(&self) -> &'static str {
        match self {
            RankMode::Raw => "raw",
            RankMode::Filtered => "filtered",
        }
    }
}

/// Ranks of the true entity for one query, under both protocols.
#[derive(Clone, Copy, Debug)]
pub struct RankResult {
    pub triple: Triple,
    pub slot: Slot,
    pub raw_rank: usize,
    pub filtered_rank: usize,
}

impl RankResult {
    pub fn rank(&self, mode: RankMode) -> usize {
        match mode {
            RankMode::Raw => self.raw_rank,
            RankMode::Filtered => self.filtered_rank,
        }
    }
}

/// Ranks the true entity of `triple` in `slot` against every candidate
/// entity. `projected` must be the model's projected entity table.
pub fn rank_entity(
    model: &Model,
    store: &TripleStore,
    triple: &Triple,
    slot: Slot,
    projected: &Array2<f64>,
) -> RankResult {
    let (fixed_id, true_id) = match slot {
        Slot::Subject => (triple.object, triple.subject),
        Slot::Object => (triple.subject, triple.object),
    };
    let fixed = model.project_entity(fixed_id);
    let scores = model.score_all(projected, &fixed, triple.relation, slot);
    let s_true = scores[true_id];
    let mut raw_rank = 1usize;
    let mut filtered_rank = 1usize;
    for (candidate, &score) in scores.iter().enumerate() {
        if candidate == true_id || score < s_true {
            continue;
        }
        raw_rank += 1;
        let candidate_triple = match slot {
            Slot::Subject => Triple::new(candidate, triple.relation, fixed_id),
            Slot::Object => Triple::new(fixed_id, triple.relation, candidate),
        };
        if !store.contains(&candidate_triple) {
            filtered_rank += 1;
        }
    }
    RankResult {
        triple: *triple,
        slot,
        raw_rank,
        filtered_rank,
    }
}

/// Ranks both slots of every triple in `split`, in split order
/// (subject query first, then object query).
pub fn rank_split(model: &Model, store: &TripleStore, split: Split) -> Vec<RankResult> {
    let projected = model.entities().projected_table();
    let mut results = Vec::with_capacity(2 * store.split(split).len());
    for triple in store.split(split) {
        for slot in Slot::BOTH {
            results.push(rank_entity(model, store, triple, slot, &projected));
        }
    }
    results
}

/// HITS@10 tally for one (slot, category) cell.
#[derive(Clone, Copy, Debug, Default)]
pub struct CategoryCell {
    pub hits10: usize,
    pub count: usize,
}

impl CategoryCell {
    pub fn hits10_pct(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            100.0 * self.hits10 as f64 / self.count as f64
        }
    }
}

/// Link-prediction metrics for one split under one ranking protocol.
#[derive(Clone, Debug)]
pub struct EvalReport {
    pub mode: RankMode,
    pub mrr: f64,
    /// Percentage of queries with rank <= 10.
    pub hits_at_10: f64,
    pub n_queries: usize,
    /// `[slot][category]`, slots indexed subject=0, object=1 and categories
    /// by [`RelationCategory::index`].
    pub by_category: [[CategoryCell; 4]; 2],
    pub map: Option<MapSummary>,
}

impl EvalReport {
    /// Aggregates rank results into metrics. Relations missing a training
    /// category (never observed in train) are tallied as n-to-n.
    pub fn from_ranks(
        ranks: &[RankResult],
        mode: RankMode,
        categories: &[Option<RelationCategory>],
    ) -> EvalReport {
        let mut mrr_sum = 0.0;
        let mut hits = 0usize;
        let mut by_category = [[CategoryCell::default(); 4]; 2];
        for r in ranks {
            let rank = r.rank(mode);
            mrr_sum += 1.0 / rank as f64;
            let hit = rank <= 10;
            if hit {
                hits += 1;
            }
            let slot_idx = match r.slot {
                Slot::Subject => 0,
                Slot::Object => 1,
            };
            let category = categories[r.triple.relation].unwrap_or(RelationCategory::ManyToMany);
            let cell = &mut by_category[slot_idx][category.index()];
            cell.count += 1;
            if hit {
                cell.hits10 += 1;
            }
        }
        let n = ranks.len();
        EvalReport {
            mode,
            mrr: if n == 0 { 0.0 } else { mrr_sum / n as f64 },
            hits_at_10: if n == 0 { 0.0 } else { 100.0 * hits as f64 / n as f64 },
            n_queries: n,
            by_category,
            map: None,
        }
    }
}

/// Default cardinality-category threshold.
pub const CATEGORY_THRESHOLD: f64 = 1.5;

/// Full link-prediction evaluation of one split.
pub fn evaluate(model: &Model, store: &TripleStore, split: Split, mode: RankMode) -> EvalReport {
    let ranks = rank_split(model, store, split);
    let categories = classify_relations(store, CATEGORY_THRESHOLD);
    EvalReport::from_ranks(&ranks, mode, &categories)
}

/// Mean average precision over type-checked candidate sets.
#[derive(Clone, Copy, Debug)]
pub struct MapSummary {
    pub map: f64,
    /// Queries that contributed to the mean.
    pub n_queries: usize,
    /// Queries whose true entity lies outside its relation's training
    /// domain; skipped and reported separately.
    pub n_skipped: usize,
}

/// Average precision over test queries with candidates restricted to the
/// relation's observed argument domain.
///
/// For each test triple and slot the candidate set is X_r (subject slot) or
/// Y_r (object slot); every entity completing a triple present in any split
/// counts as relevant. Candidates are ordered by descending score with ties
/// broken by ascending entity id.
pub fn map_type_checked(
    model: &Model,
    store: &TripleStore,
    domains: &RelationDomains,
) -> MapSummary {
    let projected = model.entities().projected_table();
    let mut ap_sum = 0.0;
    let mut n_queries = 0usize;
    let mut n_skipped = 0usize;
    for triple in store.test() {
        for slot in Slot::BOTH {
            let (fixed_id, true_id, domain) = match slot {
                Slot::Subject => (
                    triple.object,
                    triple.subject,
                    domains.subject_domain(triple.relation),
                ),
                Slot::Object => (
                    triple.subject,
                    triple.object,
                    domains.object_domain(triple.relation),
                ),
            };
            if !domain.contains(true_id) {
                n_skipped += 1;
                continue;
            }
            let fixed = model.project_entity(fixed_id);
            let scores = model.score_all(&projected, &fixed, triple.relation, slot);
            let mut candidates: Vec<usize> = domain.iter().collect();
            candidates.sort_by(|&a, &b| {
                scores[b]
                    .partial_cmp(&scores[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let relevant = |candidate: usize| -> bool {
                let t = match slot {
                    Slot::Subject => Triple::new(candidate, triple.relation, fixed_id),
                    Slot::Object => Triple::new(fixed_id, triple.relation, candidate),
                };
                store.contains(&t)
            };
            let mut n_relevant_seen = 0usize;
            let mut precision_sum = 0.0;
            for (pos, &candidate) in candidates.iter().enumerate() {
                if relevant(candidate) {
                    n_relevant_seen += 1;
                    precision_sum += n_relevant_seen as f64 / (pos + 1) as f64;
                }
            }
            // the true entity is always relevant, so n_relevant_seen >= 1
            ap_sum += precision_sum / n_relevant_seen as f64;
            n_queries += 1;
        }
    }
    MapSummary {
        map: if n_queries == 0 { 0.0 } else { ap_sum / n_queries as f64 },
        n_queries,
        n_skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{compute_domains, Vocabulary};
    use crate::models::{ModelKind, Projection, RelationParams};
    use ndarray::arr1;

    /// DistMult instance whose candidate scores for query (e0, r, ?) are
    /// e0 -> 0.9, e1 -> 0.1, e2 -> 0.5.
    fn hand_scored_model() -> Model {
        let table = Array2::from_shape_vec(
            (3, 2),
            vec![1.0, 1.0, 1.0 / 9.0, 0.0, 5.0 / 9.0, 0.0],
        )
        .unwrap();
        Model::from_parts(
            ModelKind::DistMult,
            table,
            Projection::Linear,
            vec![RelationParams::DistMult { diag: arr1(&[0.9, 0.0]) }],
        )
        .unwrap()
    }

    fn store_with(
        n_e: usize,
        train: Vec<Triple>,
        test: Vec<Triple>,
    ) -> TripleStore {
        let entities: Vec<String> = (0..n_e).map(|i| format!("e{i}")).collect();
        let vocab = Vocabulary::from_names(&entities, &["r".to_string()]).unwrap();
        TripleStore::new(vocab, train, vec![], test).unwrap()
    }

    #[test]
    fn strictly_highest_score_ranks_first() {
        let model = hand_scored_model();
        // true object e0 scores 0.9, strictly above the others
        let store = store_with(3, vec![], vec![Triple::new(0, 0, 0)]);
        let projected = model.entities().projected_table();
        let r = rank_entity(&model, &store, &Triple::new(0, 0, 0), Slot::Object, &projected);
        assert_eq!(r.raw_rank, 1);
        assert_eq!(r.filtered_rank, 1);
    }

    #[test]
    fn hand_set_scores_give_rank_two() {
        let model = hand_scored_model();
        let store = store_with(3, vec![], vec![Triple::new(0, 0, 2)]);
        let projected = model.entities().projected_table();
        let r = rank_entity(&model, &store, &Triple::new(0, 0, 2), Slot::Object, &projected);
        assert_eq!(r.raw_rank, 2);
    }

    #[test]
    fn filtering_removes_known_true_candidates() {
        let model = hand_scored_model();
        // (e0, r, e0) is a known training triple, so candidate e0 (score 0.9)
        // is filtered out of the (e0, r, e2) query.
        let store = store_with(
            3,
            vec![Triple::new(0, 0, 0)],
            vec![Triple::new(0, 0, 2)],
        );
        let projected = model.entities().projected_table();
        let r = rank_entity(&model, &store, &Triple::new(0, 0, 2), Slot::Object, &projected);
        assert_eq!(r.raw_rank, 2);
        assert_eq!(r.filtered_rank, 1);
    }

    #[test]
    fn mrr_and_hits_from_known_ranks() {
        let mk = |raw: usize| RankResult {
            triple: Triple::new(0, 0, 1),
            slot: Slot::Object,
            raw_rank: raw,
            filtered_rank: raw,
        };
        let categories = vec![Some(RelationCategory::OneToOne)];
        let report = EvalReport::from_ranks(&[mk(1), mk(2), mk(4)], RankMode::Raw, &categories);
        assert!((report.mrr - (1.0 + 0.5 + 0.25) / 3.0).abs() < 1e-12);

        let report = EvalReport::from_ranks(&[mk(1), mk(11), mk(10)], RankMode::Raw, &categories);
        assert!((report.hits_at_10 - 100.0 * 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn category_cells_average_back_to_overall() {
        let model = Model::init(ModelKind::TransE, 8, 3, 4, Projection::Linear, 3);
        let mut train = Vec::new();
        for s in 0..4 {
            train.push(Triple::new(s, s % 3, s + 4));
            train.push(Triple::new(s, (s + 1) % 3, 7 - s));
        }
        let entities: Vec<String> = (0..8).map(|i| format!("e{i}")).collect();
        let relations: Vec<String> = (0..3).map(|i| format!("r{i}")).collect();
        let vocab = Vocabulary::from_names(&entities, &relations).unwrap();
        let test = vec![Triple::new(1, 0, 5), Triple::new(2, 1, 3), Triple::new(0, 2, 6)];
        let store = TripleStore::new(vocab, train, vec![], test).unwrap();
        let report = evaluate(&model, &store, Split::Test, RankMode::Filtered);
        let weighted: f64 = report
            .by_category
            .iter()
            .flatten()
            .map(|c| c.hits10 as f64)
            .sum();
        let total: usize = report.by_category.iter().flatten().map(|c| c.count).sum();
        assert_eq!(total, report.n_queries);
        let overall = 100.0 * weighted / total as f64;
        assert!((overall - report.hits_at_10).abs() < 1e-9);
    }

    /// Bilinear model with one-hot entity rows and the union adjacency as
    /// relation matrix scores exactly 1 on known triples and 0 elsewhere.
    fn membership_oracle_model(store: &TripleStore) -> Model {
        let n_e = store.n_entities();
        let mut relations = Vec::new();
        for r in 0..store.n_relations() {
            let mut adj = Array2::zeros((n_e, n_e));
            for split in [Split::Train, Split::Valid, Split::Test] {
                for t in store.split(split) {
                    if t.relation == r {
                        adj[(t.subject, t.object)] = 1.0;
                    }
                }
            }
            relations.push(RelationParams::Bilinear { m: adj });
        }
        Model::from_parts(ModelKind::Bilinear, Array2::eye(n_e), Projection::Linear, relations)
            .unwrap()
    }

    #[test]
    fn membership_oracle_has_perfect_filtered_mrr() {
        let mut train = Vec::new();
        for s in 0..10usize {
            train.push(Triple::new(s, 0, (s + 1) % 10));
        }
        let test = vec![Triple::new(0, 0, 2), Triple::new(5, 0, 9)];
        let store = store_with(10, train, test);
        let model = membership_oracle_model(&store);
        let report = evaluate(&model, &store, Split::Test, RankMode::Filtered);
        assert_eq!(report.mrr, 1.0);
        assert_eq!(report.hits_at_10, 100.0);
    }

    #[test]
    fn map_examples() {
        // Query (e0, r, ? = e1): domain {e1..e4}, only e1 relevant, ranked
        // first among 4 -> AP 1.0.
        let model = membership_oracle_model(&store_with(
            5,
            vec![
                Triple::new(0, 0, 1),
                Triple::new(2, 0, 2),
                Triple::new(2, 0, 3),
                Triple::new(2, 0, 4),
            ],
            vec![],
        ));
        // rebuild the store so the test triple is (e0, r, e1) itself
        let store = store_with(
            5,
            vec![
                Triple::new(0, 0, 1),
                Triple::new(2, 0, 2),
                Triple::new(2, 0, 3),
                Triple::new(2, 0, 4),
            ],
            vec![Triple::new(0, 0, 1)],
        );
        let domains = compute_domains(&store);
        let summary = map_type_checked(&model, &store, &domains);
        // object query: candidates {1,2,3,4}, only e1 relevant and top-ranked;
        // subject query: candidates {0,2}, only e0 relevant and top-ranked.
        assert!((summary.map - 1.0).abs() < 1e-12);
        assert_eq!(summary.n_queries, 2);
        assert_eq!(summary.n_skipped, 0);
    }

    #[test]
    fn map_average_precision_definition() {
        // Hand-built scores: candidates {0,1,2,3,4}, relevant at ranks 1 and 3
        // -> AP = (1/1 + 2/3) / 2.
        let scores = [0.9, 0.7, 0.5, 0.3, 0.1];
        let relevant = [true, false, true, false, false];
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
        let mut seen = 0;
        let mut sum = 0.0;
        for (pos, &c) in order.iter().enumerate() {
            if relevant[c] {
                seen += 1;
                sum += seen as f64 / (pos + 1) as f64;
            }
        }
        let ap = sum / seen as f64;
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn map_skips_queries_outside_domain() {
        // test triple's subject never appears as subject of r in train
        let store = store_with(
            4,
            vec![Triple::new(0, 0, 1)],
            vec![Triple::new(2, 0, 1)],
        );
        let model = membership_oracle_model(&store);
        let domains = compute_domains(&store);
        let summary = map_type_checked(&model, &store, &domains);
        // subject query skipped (e2 not in X_r); object query evaluated
        assert_eq!(summary.n_skipped, 1);
        assert_eq!(summary.n_queries, 1);
    }
}
