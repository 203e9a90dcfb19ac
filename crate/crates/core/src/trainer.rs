//! Margin-ranking training with negative sampling, AdaGrad, L2 relation
//! regularization, and per-step entity renormalization.
//!
//! Each epoch shuffles the training triples and splits them into a fixed
//! number of mini-batches. Every positive triple contributes two ranking
//! pairs, one against a subject-corrupted negative and one against an
//! object-corrupted negative. Subgradients of the hinge are summed over the
//! batch, applied with AdaGrad, and entity rows are renormalized to unit
//! length after every batch. Everything is single-threaded and deterministic
//! for a fixed seed.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{self, RankMode};
use crate::kb::{Split, Triple, TripleStore};
use crate::models::{Model, RelationParams, ScoreGrad};

const ADAGRAD_EPSILON: f64 = 1e-8;
const NEGATIVE_SAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training split is empty")]
    EmptyTrainingSplit,
    #[error("need at least 2 entities for corruption sampling")]
    TooFewEntities,
    #[error("no fresh negative found in {attempts} attempts for triple ({0}, {1}, {2})", attempts = NEGATIVE_SAMPLE_ATTEMPTS)]
    SamplingExhausted(usize, usize, usize),
    #[error("non-finite gradient at epoch {epoch}, batch {batch}")]
    NonFiniteGradient { epoch: usize, batch: usize },
}

/// Training hyperparameters.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Mini-batches per epoch.
    pub batches: usize,
    pub learning_rate: f64,
    pub margin: f64,
    /// L2 coefficient on relation parameters only.
    pub l2: f64,
    pub seed: u64,
    /// When set, filtered MRR on the validation split is recorded every
    /// `k` epochs.
    pub valid_mrr_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batches: 10,
            learning_rate: 0.1,
            margin: 1.0,
            l2: 1e-4,
            seed: 0,
            valid_mrr_every: None,
        }
    }
}

impl TrainConfig {
    /// Defaults used for the Freebase-style benchmarks: 100 epochs.
    pub fn fb15k_default() -> Self {
        TrainConfig::default()
    }

    /// Defaults used for the WordNet-style benchmark: 300 epochs.
    pub fn wn_default() -> Self {
        TrainConfig {
            epochs: 300,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batches == 0 {
            return Err(TrainError::InvalidConfig("batches must be positive".into()));
        }
        if self.learning_rate < 0.0 {
            return Err(TrainError::InvalidConfig("learning_rate must be non-negative".into()));
        }
        if self.margin <= 0.0 {
            return Err(TrainError::InvalidConfig("margin must be positive".into()));
        }
        if self.l2 < 0.0 {
            return Err(TrainError::InvalidConfig("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-parameter accumulated squared gradients.
#[derive(Clone, Debug)]
pub struct AdaGradState {
    entities: Array2<f64>,
    relations: Vec<RelationParams>,
}

impl AdaGradState {
    pub fn new(model: &Model) -> Self {
        AdaGradState {
            entities: Array2::zeros(model.entity_table().raw_dim()),
            relations: model.relations().iter().map(|p| p.zeros_like()).collect(),
        }
    }

    pub fn entities(&self) -> &Array2<f64> {
        &self.entities
    }

    pub fn relations(&self) -> &[RelationParams] {
        &self.relations
    }
}

/// Sparse gradient accumulator for one mini-batch. Entity gradients are kept
/// per touched row; relation gradients per touched relation.
#[derive(Debug, Default)]
pub struct GradientBatch {
    entities: HashMap<usize, Array1<f64>>,
    relations: HashMap<usize, RelationParams>,
}

impl GradientBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    /// Accumulates `scale * grad` for the given triple's parameters.
    pub fn add_scaled(&mut self, triple: &Triple, grad: &ScoreGrad, scale: f64) {
        self.add_entity(triple.subject, &grad.subject, scale);
        self.add_entity(triple.object, &grad.object, scale);
        let entry = self
            .relations
            .entry(triple.relation)
            .or_insert_with(|| grad.relation.zeros_like());
        for (dst, src) in entry.blocks_mut().into_iter().zip(grad.relation.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn add_entity(&mut self, id: usize, grad: &Array1<f64>, scale: f64) {
        let entry = self
            .entities
            .entry(id)
            .or_insert_with(|| Array1::zeros(grad.len()));
        entry.zip_mut_with(grad, |d, s| *d += scale * s);
    }

    pub fn is_finite(&self) -> bool {
        self.entities.values().all(|g| g.iter().all(|x| x.is_finite()))
            && self.relations.values().all(|g| g.is_finite())
    }
}

/// Margin-1 ranking loss of a positive/negative score pair.
pub fn margin_loss(s_pos: f64, s_neg: f64) -> f64 {
    hinge_loss(s_pos, s_neg, 1.0)
}

pub fn hinge_loss(s_pos: f64, s_neg: f64, margin: f64) -> f64 {
    (s_neg - s_pos + margin).max(0.0)
}

/// Draws one subject-corrupted and one object-corrupted negative for a
/// positive triple. Corrupting entities are uniform over the entity set and
/// the result must not be contained in the union of all splits; sampling
/// retries up to a fixed bound.
pub fn sample_negatives(
    triple: &Triple,
    store: &TripleStore,
    rng: &mut ChaCha8Rng,
) -> Result<(Triple, Triple), TrainError> {
    let n_e = store.n_entities();
    if n_e < 2 {
        return Err(TrainError::TooFewEntities);
    }
    let mut corrupt = |subject_slot: bool| -> Result<Triple, TrainError> {
        for _ in 0..NEGATIVE_SAMPLE_ATTEMPTS {
            let e = rng.gen_range(0..n_e);
            let candidate = if subject_slot {
                Triple::new(e, triple.relation, triple.object)
            } else {
                Triple::new(triple.subject, triple.relation, e)
            };
            if !store.contains(&candidate) {
                return Ok(candidate);
            }
        }
        Err(TrainError::SamplingExhausted(
            triple.subject,
            triple.relation,
            triple.object,
        ))
    };
    let neg_subject = corrupt(true)?;
    let neg_object = corrupt(false)?;
    Ok((neg_subject, neg_object))
}

/// One AdaGrad update: `G += g²; θ -= lr·g/√(G+ε)` elementwise.
///
/// The L2 term `2·λ·θ` is added to every relation parameter's gradient
/// (entity rows are never regularized), so relation parameters decay even in
/// batches where they receive no ranking gradient.
pub fn adagrad_step(
    model: &mut Model,
    grads: &GradientBatch,
    state: &mut AdaGradState,
    learning_rate: f64,
    l2: f64,
) {
    for (&id, grad) in &grads.entities {
        let mut row = model.entity_table_mut().row_mut(id);
        let mut acc = state.entities.row_mut(id);
        for ((theta, g), a) in row.iter_mut().zip(grad.iter()).zip(acc.iter_mut()) {
            *a += g * g;
            *theta -= learning_rate * g / (*a + ADAGRAD_EPSILON).sqrt();
        }
    }
    for r in 0..model.n_relations() {
        let batch_grad = grads.relations.get(&r);
        if batch_grad.is_none() && l2 == 0.0 {
            continue;
        }
        let params = model.relation_mut(r);
        let acc = &mut state.relations[r];
        let grad_blocks: Option<Vec<&[f64]>> = batch_grad.map(|g| g.blocks());
        for (bi, (theta_block, acc_block)) in params
            .blocks_mut()
            .into_iter()
            .zip(acc.blocks_mut())
            .enumerate()
        {
            for (i, (theta, a)) in theta_block.iter_mut().zip(acc_block.iter_mut()).enumerate() {
                let mut g = grad_blocks.as_ref().map_or(0.0, |blocks| blocks[bi][i]);
                g += 2.0 * l2 * *theta;
                if g == 0.0 {
                    continue;
                }
                *a += g * g;
                *theta -= learning_rate * g / (*a + ADAGRAD_EPSILON).sqrt();
            }
        }
    }
}

/// Rescales every entity row to unit L2 norm. Rows already unit within
/// 1e-12 are left untouched, which makes the operation idempotent at the
/// bit level; rows that collapsed to zero norm are re-randomized before
/// normalizing.
pub fn renormalize_entities(model: &mut Model, rng: &mut ChaCha8Rng) {
    for mut row in model.entity_table_mut().rows_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() <= 1e-12 {
            continue;
        }
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        } else {
            for x in row.iter_mut() {
                *x = rng.gen_range(-0.1..0.1);
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|x| x / norm);
            } else {
                row.fill(0.0);
                row[0] = 1.0;
            }
        }
    }
}

/// Per-epoch training statistics.
#[derive(Clone, Debug)]
pub struct EpochStats {
    /// Mean hinge loss over the epoch's ranking pairs (2 per positive).
    pub mean_loss: f64,
    /// Pairs with a strictly positive hinge.
    pub active_pairs: usize,
    pub valid_mrr: Option<f64>,
}

pub type TrainHistory = Vec<EpochStats>;

/// Runs the full training loop in place and returns per-epoch statistics.
pub fn train(
    model: &mut Model,
    store: &TripleStore,
    config: &TrainConfig,
) -> Result<TrainHistory, TrainError> {
    config.validate()?;
    if config.epochs == 0 {
        return Ok(Vec::new());
    }
    if store.train().is_empty() {
        return Err(TrainError::EmptyTrainingSplit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdaGradState::new(model);
    let mut history = Vec::with_capacity(config.epochs);
    let n = store.train().len();
    let mut order: Vec<usize> = (0..n).collect();
    let batch_size = n.div_ceil(config.batches);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total_loss = 0.0;
        let mut active_pairs = 0usize;
        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let mut grads = GradientBatch::new();
            for &i in chunk {
                let pos = store.train()[i];
                let (neg_subject, neg_object) = sample_negatives(&pos, store, &mut rng)?;
                let s_pos = model.score(&pos);
                let mut pos_grad: Option<ScoreGrad> = None;
                for neg in [neg_subject, neg_object] {
                    let s_neg = model.score(&neg);
                    let loss = hinge_loss(s_pos, s_neg, config.margin);
                    total_loss += loss;
                    if loss > 0.0 {
                        active_pairs += 1;
                        let gp = pos_grad.get_or_insert_with(|| model.score_grad(&pos));
                        grads.add_scaled(&pos, gp, -1.0);
                        let gn = model.score_grad(&neg);
                        grads.add_scaled(&neg, &gn, 1.0);
                    }
                }
            }
            if !grads.is_finite() {
                return Err(TrainError::NonFiniteGradient { epoch, batch: batch_idx });
            }
            adagrad_step(model, &grads, &mut state, config.learning_rate, config.l2);
            renormalize_entities(model, &mut rng);
        }
        let valid_mrr = match config.valid_mrr_every {
            Some(k) if k > 0 && (epoch + 1) % k == 0 && !store.valid().is_empty() => Some(
                eval::evaluate(model, store, Split::Valid, RankMode::Filtered).mrr,
            ),
            _ => None,
        };
        history.push(EpochStats {
            mean_loss: total_loss / (2 * n) as f64,
            active_pairs,
            valid_mrr,
        });
    }
    Ok(history)
}
