//! Learning and inference over multi-relational knowledge bases: neural
//! embedding models for (subject, relation, object) facts, link-prediction
//! evaluation, and Horn rule mining from composed relation embeddings.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`kb`]: triple ingestion, vocabularies, splits, argument domains.
//! - [`models`]: the five embedding variants with scoring, analytic
//!   gradients, relation composition, and embedding distances.
//! - [`trainer`]: margin-ranking optimization with negative sampling,
//!   AdaGrad, and entity renormalization.
//! - [`eval`]: raw/filtered entity ranking, MRR, HITS@10, category
//!   breakdowns, type-checked MAP.
//! - [`rules`]: closed-path rule search over relation embeddings with
//!   confidence scoring and precision curves.
//! - [`synthetic`]: generators for KBs with planted compositional rules.
//!
//! All numeric state is 64-bit. Training, evaluation, and mining are
//! deterministic for a fixed seed and single-threaded by design; everything
//! is safe to read concurrently once constructed.

pub mod bitset;
pub mod eval;
pub mod kb;
pub mod models;
pub mod rules;
pub mod synthetic;
pub mod trainer;

pub use eval::{evaluate, map_type_checked, EvalReport, RankMode, RankResult};
pub use kb::{
    classify_relations, compute_domains, KbError, RelationCategory, RelationDomains, Split,
    Triple, TripleStore, Vocabulary,
};
pub use models::{
    relation_distance, Model, ModelError, ModelKind, PretrainedVectors, Projection,
    RelationEmbedding, RelationParams, Slot,
};
pub use rules::{
    embed_rule, gap_cutoff, instantiate_rule, MiningConfig, Prediction, RuleCandidate, RuleError,
};
pub use trainer::{train, TrainConfig, TrainError, TrainHistory};
