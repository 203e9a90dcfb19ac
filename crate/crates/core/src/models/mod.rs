//! Embedding parameters, scoring functions, analytic gradients, and relation
//! composition for the five model variants.
//!
//! All variants share one structure: entities are rows of a projection table
//! (optionally passed through tanh), relations are per-relation parameter
//! blocks combined with the two projected entity vectors by a linear and/or
//! bilinear form. Scores are "higher is more plausible" for every variant.

mod compose;
mod score;

pub use compose::{relation_distance, RelationEmbedding};
pub use score::{score_projected, ScoreGrad};

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kb::Vocabulary;

/// Number of tensor slices used by the full tensor variant.
pub const NTN_SLICES: usize = 4;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot parse pretrained vector entry")]
    PretrainedParse { path: String, line: usize },
    #[error("pretrained vector for '{token}' has length {got}, expected {expected}")]
    PretrainedDimension {
        token: String,
        expected: usize,
        got: usize,
    },
    #[error("relation composition is not supported for '{kind}' embeddings")]
    UnsupportedComposition { kind: &'static str },
    #[error("embedding shape mismatch: {a} vs {b}")]
    ShapeMismatch { a: String, b: String },
    #[error("relation sequence is empty")]
    EmptySequence,
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

/// Which scoring family a model belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Translation vector per relation, additive interaction.
    TransE,
    /// Diagonal bilinear form (one weight vector per relation).
    DistMult,
    /// Full d×d bilinear matrix per relation.
    Bilinear,
    /// One bilinear slice plus linear operators, no non-linearity.
    BilinearLinear,
    /// Tensor of bilinear slices plus linear operators under tanh.
    Ntn,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::DistMult => "distmult",
            ModelKind::Bilinear => "bilinear",
            ModelKind::BilinearLinear => "bilinear-linear",
            ModelKind::Ntn => "ntn",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "transe" => Some(ModelKind::TransE),
            "distmult" => Some(ModelKind::DistMult),
            "bilinear" => Some(ModelKind::Bilinear),
            "bilinear-linear" => Some(ModelKind::BilinearLinear),
            "ntn" => Some(ModelKind::Ntn),
            _ => None,
        }
    }

    /// Vector- and matrix-shaped relation embeddings compose; the variants
    /// with extra linear operators do not.
    pub fn supports_composition(&self) -> bool {
        matches!(self, ModelKind::TransE | ModelKind::DistMult | ModelKind::Bilinear)
    }

    /// Tensor slice count for this kind.
    pub fn slices(&self) -> usize {
        match self {
            ModelKind::Ntn => NTN_SLICES,
            ModelKind::BilinearLinear => 1,
            _ => 0,
        }
    }

    pub const ALL: [ModelKind; 5] = [
        ModelKind::TransE,
        ModelKind::DistMult,
        ModelKind::Bilinear,
        ModelKind::BilinearLinear,
        ModelKind::Ntn,
    ];
}

/// Entity projection mode applied to stored rows before scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    Linear,
    Tanh,
}

impl Projection {
    pub fn name(&self) -> &'static str {
        match self {
            Projection::Linear => "linear",
            Projection::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Projection> {
        match s {
            "linear" => Some(Projection::Linear),
            "tanh" => Some(Projection::Tanh),
            _ => None,
        }
    }
}

/// Per-relation parameter blocks. The same enum doubles as the container for
/// gradients and optimizer accumulators, which keeps shapes aligned by
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationParams {
    TransE {
        v: Array1<f64>,
    },
    DistMult {
        diag: Array1<f64>,
    },
    Bilinear {
        m: Array2<f64>,
    },
    BilinearLinear {
        t: Array2<f64>,
        q1: Array1<f64>,
        q2: Array1<f64>,
    },
    Ntn {
        /// Slice-major tensor: `t[k]` is the k-th d×d bilinear slice.
        t: Array3<f64>,
        /// d×m linear operator on the subject vector.
        q1: Array2<f64>,
        /// d×m linear operator on the object vector.
        q2: Array2<f64>,
        u: Array1<f64>,
    },
}

impl RelationParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            RelationParams::TransE { .. } => ModelKind::TransE,
            RelationParams::DistMult { .. } => ModelKind::DistMult,
            RelationParams::Bilinear { .. } => ModelKind::Bilinear,
            RelationParams::BilinearLinear { .. } => ModelKind::BilinearLinear,
            RelationParams::Ntn { .. } => ModelKind::Ntn,
        }
    }

    /// Contiguous parameter blocks in canonical order. This order defines the
    /// checkpoint layout, so it must stay stable.
    pub fn blocks(&self) -> Vec<&[f64]> {
        match self {
            RelationParams::TransE { v } => vec![flat(v)],
            RelationParams::DistMult { diag } => vec![flat(diag)],
            RelationParams::Bilinear { m } => vec![flat2(m)],
            RelationParams::BilinearLinear { t, q1, q2 } => vec![flat2(t), flat(q1), flat(q2)],
            RelationParams::Ntn { t, q1, q2, u } => {
                vec![flat3(t), flat2(q1), flat2(q2), flat(u)]
            }
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            RelationParams::TransE { v } => vec![flat_mut(v)],
            RelationParams::DistMult { diag } => vec![flat_mut(diag)],
            RelationParams::Bilinear { m } => vec![flat2_mut(m)],
            RelationParams::BilinearLinear { t, q1, q2 } => {
                vec![flat2_mut(t), flat_mut(q1), flat_mut(q2)]
            }
            RelationParams::Ntn { t, q1, q2, u } => {
                vec![flat3_mut(t), flat2_mut(q1), flat2_mut(q2), flat_mut(u)]
            }
        }
    }

    pub fn zeros_like(&self) -> RelationParams {
        match self {
            RelationParams::TransE { v } => RelationParams::TransE {
                v: Array1::zeros(v.len()),
            },
            RelationParams::DistMult { diag } => RelationParams::DistMult {
                diag: Array1::zeros(diag.len()),
            },
            RelationParams::Bilinear { m } => RelationParams::Bilinear {
                m: Array2::zeros(m.raw_dim()),
            },
            RelationParams::BilinearLinear { t, q1, q2 } => RelationParams::BilinearLinear {
                t: Array2::zeros(t.raw_dim()),
                q1: Array1::zeros(q1.len()),
                q2: Array1::zeros(q2.len()),
            },
            RelationParams::Ntn { t, q1, q2, u } => RelationParams::Ntn {
                t: Array3::zeros(t.raw_dim()),
                q1: Array2::zeros(q1.raw_dim()),
                q2: Array2::zeros(q2.raw_dim()),
                u: Array1::zeros(u.len()),
            },
        }
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

fn flat(a: &Array1<f64>) -> &[f64] {
    a.as_slice().expect("contiguous array")
}

fn flat_mut(a: &mut Array1<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("contiguous array")
}

fn flat2(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("contiguous array")
}

fn flat2_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("contiguous array")
}

fn flat3(a: &Array3<f64>) -> &[f64] {
    a.as_slice().expect("contiguous array")
}

fn flat3_mut(a: &mut Array3<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("contiguous array")
}

/// Entity rows plus the projection mode applied on read.
#[derive(Clone, Debug)]
pub struct EntityEmbeddings {
    table: Array2<f64>,
    projection: Projection,
}

impl EntityEmbeddings {
    pub fn table(&self) -> &Array2<f64> {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut Array2<f64> {
        &mut self.table
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    /// Projected representation of one entity.
    pub fn project(&self, id: usize) -> Array1<f64> {
        let row = self.table.row(id);
        match self.projection {
            Projection::Linear => row.to_owned(),
            Projection::Tanh => row.mapv(f64::tanh),
        }
    }

    /// The whole table with the projection applied, for batch scoring.
    pub fn projected_table(&self) -> Array2<f64> {
        match self.projection {
            Projection::Linear => self.table.clone(),
            Projection::Tanh => self.table.mapv(f64::tanh),
        }
    }
}

/// A complete embedding model: entity table plus one parameter block per
/// relation.
#[derive(Clone, Debug)]
pub struct Model {
    kind: ModelKind,
    entities: EntityEmbeddings,
    relations: Vec<RelationParams>,
    d: usize,
}

impl Model {
    /// Random initialization: entity rows i.i.d. uniform in [-0.1, 0.1] then
    /// unit-normalized; relation parameters uniform in [-0.1, 0.1].
    /// Deterministic for a fixed seed.
    pub fn init(
        kind: ModelKind,
        n_entities: usize,
        n_relations: usize,
        d: usize,
        projection: Projection,
        seed: u64,
    ) -> Model {
        assert!(d >= 1, "embedding dimension must be >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = Array2::zeros((n_entities, d));
        for mut row in table.rows_mut() {
            for x in row.iter_mut() {
                *x = rng.gen_range(-0.1..0.1);
            }
            normalize_row(&mut row);
        }
        let relations = (0..n_relations)
            .map(|_| random_relation_params(kind, d, &mut rng))
            .collect();
        Model {
            kind,
            entities: EntityEmbeddings { table, projection },
            relations,
            d,
        }
    }

    /// Assembles a model from explicit parts, validating shape consistency.
    pub fn from_parts(
        kind: ModelKind,
        table: Array2<f64>,
        projection: Projection,
        relations: Vec<RelationParams>,
    ) -> Result<Model, ModelError> {
        let d = table.ncols();
        if d == 0 {
            return Err(ModelError::InvalidParams("entity dimension is 0".into()));
        }
        for (r, params) in relations.iter().enumerate() {
            if params.kind() != kind {
                return Err(ModelError::InvalidParams(format!(
                    "relation {r} has kind {}, model is {}",
                    params.kind().name(),
                    kind.name()
                )));
            }
            let ok = match params {
                RelationParams::TransE { v } => v.len() == d,
                RelationParams::DistMult { diag } => diag.len() == d,
                RelationParams::Bilinear { m } => m.dim() == (d, d),
                RelationParams::BilinearLinear { t, q1, q2 } => {
                    t.dim() == (d, d) && q1.len() == d && q2.len() == d
                }
                RelationParams::Ntn { t, q1, q2, u } => {
                    let m = u.len();
                    t.dim() == (m, d, d) && q1.dim() == (d, m) && q2.dim() == (d, m)
                }
            };
            if !ok {
                return Err(ModelError::InvalidParams(format!(
                    "relation {r} has shapes inconsistent with d={d}"
                )));
            }
        }
        Ok(Model {
            kind,
            entities: EntityEmbeddings { table, projection },
            relations,
            d,
        })
    }

    /// Overwrites rows for entities present in `vectors` (normalized); absent
    /// entities keep their random initialization. Returns how many rows were
    /// covered.
    pub fn apply_pretrained(
        &mut self,
        vocab: &Vocabulary,
        vectors: &PretrainedVectors,
    ) -> Result<usize, ModelError> {
        let mut covered = 0;
        for id in 0..self.n_entities() {
            let token = vocab.entity_name(id);
            if let Some(vec) = vectors.get(token) {
                if vec.len() != self.d {
                    return Err(ModelError::PretrainedDimension {
                        token: token.to_string(),
                        expected: self.d,
                        got: vec.len(),
                    });
                }
                let mut row = self.entities.table.row_mut(id);
                for (dst, src) in row.iter_mut().zip(vec) {
                    *dst = *src;
                }
                normalize_row(&mut row);
                covered += 1;
            }
        }
        Ok(covered)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn slices(&self) -> usize {
        self.kind.slices()
    }

    pub fn projection(&self) -> Projection {
        self.entities.projection()
    }

    pub fn n_entities(&self) -> usize {
        self.entities.table.nrows()
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entities(&self) -> &EntityEmbeddings {
        &self.entities
    }

    pub fn entity_table(&self) -> &Array2<f64> {
        self.entities.table()
    }

    pub fn entity_table_mut(&mut self) -> &mut Array2<f64> {
        self.entities.table_mut()
    }

    pub fn relation(&self, r: usize) -> &RelationParams {
        &self.relations[r]
    }

    pub fn relation_mut(&mut self, r: usize) -> &mut RelationParams {
        &mut self.relations[r]
    }

    pub fn relations(&self) -> &[RelationParams] {
        &self.relations
    }

    /// Projected representation of one entity.
    pub fn project_entity(&self, id: usize) -> Array1<f64> {
        self.entities.project(id)
    }
}

fn normalize_row(row: &mut ndarray::ArrayViewMut1<f64>) {
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        row.mapv_inplace(|x| x / norm);
    } else {
        row.fill(0.0);
        row[0] = 1.0;
    }
}

fn random_relation_params(kind: ModelKind, d: usize, rng: &mut ChaCha8Rng) -> RelationParams {
    let mut vec = |n: usize| -> Array1<f64> {
        Array1::from_iter((0..n).map(|_| rng.gen_range(-0.1..0.1)))
    };
    match kind {
        ModelKind::TransE => RelationParams::TransE { v: vec(d) },
        ModelKind::DistMult => RelationParams::DistMult { diag: vec(d) },
        ModelKind::Bilinear => {
            let m = vec(d * d).into_shape_with_order((d, d)).unwrap();
            RelationParams::Bilinear { m }
        }
        ModelKind::BilinearLinear => {
            let t = vec(d * d).into_shape_with_order((d, d)).unwrap();
            let q1 = vec(d);
            let q2 = vec(d);
            RelationParams::BilinearLinear { t, q1, q2 }
        }
        ModelKind::Ntn => {
            let m = NTN_SLICES;
            let t = vec(m * d * d).into_shape_with_order((m, d, d)).unwrap();
            let q1 = vec(d * m).into_shape_with_order((d, m)).unwrap();
            let q2 = vec(d * m).into_shape_with_order((d, m)).unwrap();
            let u = vec(m);
            RelationParams::Ntn { t, q1, q2, u }
        }
    }
}

/// Token-to-vector map loaded from an entity vector file: one line per
/// entity, `token v1 v2 ... vd`, space-separated.
#[derive(Clone, Debug, Default)]
pub struct PretrainedVectors {
    map: HashMap<String, Vec<f64>>,
}

impl PretrainedVectors {
    pub fn load(path: &Path) -> Result<PretrainedVectors, ModelError> {
        let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let token = fields.next().ok_or_else(|| ModelError::PretrainedParse {
                path: path.display().to_string(),
                line: i + 1,
            })?;
            let values: Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
            let values = values.map_err(|_| ModelError::PretrainedParse {
                path: path.display().to_string(),
                line: i + 1,
            })?;
            if values.is_empty() {
                return Err(ModelError::PretrainedParse {
                    path: path.display().to_string(),
                    line: i + 1,
                });
            }
            map.insert(token.to_string(), values);
        }
        Ok(PretrainedVectors { map })
    }

    pub fn from_map(map: HashMap<String, Vec<f64>>) -> PretrainedVectors {
        PretrainedVectors { map }
    }

    pub fn get(&self, token: &str) -> Option<&Vec<f64>> {
        self.map.get(token)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Candidate slot in a ranking or scoring query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Subject,
    Object,
}

impl Slot {
    pub fn name(&self) -> &'static str {
        match self {
            Slot::Subject => "subject",
            Slot::Object => "object",
        }
    }

    pub const BOTH: [Slot; 2] = [Slot::Subject, Slot::Object];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_under_seed() {
        for kind in ModelKind::ALL {
            let a = Model::init(kind, 7, 3, 5, Projection::Linear, 42);
            let b = Model::init(kind, 7, 3, 5, Projection::Linear, 42);
            assert_eq!(a.entity_table(), b.entity_table());
            for r in 0..3 {
                assert_eq!(a.relation(r), b.relation(r));
            }
            let c = Model::init(kind, 7, 3, 5, Projection::Linear, 43);
            assert_ne!(a.entity_table(), c.entity_table());
        }
    }

    #[test]
    fn init_rows_are_unit_norm() {
        let model = Model::init(ModelKind::DistMult, 20, 4, 8, Projection::Linear, 1);
        for row in model.entity_table().rows() {
            let norm = row.dot(&row).sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
        }
    }

    #[test]
    fn pretrained_rows_override_random_ones() {
        let vocab = Vocabulary::from_names(&["a", "b", "c", "d"], &["r"]).unwrap();
        let mut model = Model::init(ModelKind::DistMult, 4, 1, 2, Projection::Linear, 9);
        let baseline = Model::init(ModelKind::DistMult, 4, 1, 2, Projection::Linear, 9);
        let mut map = HashMap::new();
        map.insert("a".to_string(), vec![3.0, 4.0]);
        map.insert("c".to_string(), vec![0.0, 2.0]);
        let covered = model
            .apply_pretrained(&vocab, &PretrainedVectors::from_map(map))
            .unwrap();
        assert_eq!(covered, 2);
        let row_a = model.entity_table().row(0);
        assert!((row_a[0] - 0.6).abs() < 1e-15 && (row_a[1] - 0.8).abs() < 1e-15);
        let row_c = model.entity_table().row(2);
        assert!((row_c[0]).abs() < 1e-15 && (row_c[1] - 1.0).abs() < 1e-15);
        // uncovered entities keep the seed-determined rows
        assert_eq!(model.entity_table().row(1), baseline.entity_table().row(1));
        assert_eq!(model.entity_table().row(3), baseline.entity_table().row(3));
    }

    #[test]
    fn pretrained_dimension_mismatch_is_error() {
        let vocab = Vocabulary::from_names(&["a"], &["r"]).unwrap();
        let mut model = Model::init(ModelKind::DistMult, 1, 1, 2, Projection::Linear, 0);
        let mut map = HashMap::new();
        map.insert("a".to_string(), vec![1.0, 2.0, 3.0]);
        let err = model
            .apply_pretrained(&vocab, &PretrainedVectors::from_map(map))
            .unwrap_err();
        assert!(matches!(err, ModelError::PretrainedDimension { got: 3, expected: 2, .. }));
    }

    #[test]
    fn projection_modes() {
        let table =
            Array2::from_shape_vec((2, 2), vec![0.6, 0.8, 10.0, -10.0]).unwrap();
        let linear = Model::from_parts(
            ModelKind::DistMult,
            table.clone(),
            Projection::Linear,
            vec![RelationParams::DistMult { diag: Array1::ones(2) }],
        )
        .unwrap();
        assert_eq!(linear.project_entity(0), ndarray::arr1(&[0.6, 0.8]));

        let tanh = Model::from_parts(
            ModelKind::DistMult,
            table,
            Projection::Tanh,
            vec![RelationParams::DistMult { diag: Array1::ones(2) }],
        )
        .unwrap();
        let zero = Model::from_parts(
            ModelKind::DistMult,
            Array2::zeros((1, 2)),
            Projection::Tanh,
            vec![RelationParams::DistMult { diag: Array1::ones(2) }],
        )
        .unwrap();
        assert_eq!(zero.project_entity(0), ndarray::arr1(&[0.0, 0.0]));
        let saturated = tanh.project_entity(1);
        assert!((saturated[0] - 1.0).abs() < 1e-4);
        assert!((saturated[1] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn blocks_cover_all_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = 3;
        for kind in ModelKind::ALL {
            let params = random_relation_params(kind, d, &mut rng);
            let expected = match kind {
                ModelKind::TransE | ModelKind::DistMult => d,
                ModelKind::Bilinear => d * d,
                ModelKind::BilinearLinear => d * d + 2 * d,
                ModelKind::Ntn => NTN_SLICES * d * d + 2 * d * NTN_SLICES + NTN_SLICES,
            };
            assert_eq!(params.n_params(), expected);
            let zeros = params.zeros_like();
            assert_eq!(zeros.n_params(), expected);
            assert!(zeros.blocks().iter().all(|b| b.iter().all(|&x| x == 0.0)));
        }
    }
}
