//! Relation composition along a path and distances between relation
//! embeddings.
//!
//! Translation embeddings compose by addition, matrix embeddings by matrix
//! product in path order. Diagonal matrices are kept as their diagonal
//! vectors: the elementwise product equals the diagonal of the matrix
//! product, and the Euclidean distance of diagonals equals the Frobenius
//! distance of the corresponding matrices.

use ndarray::{Array1, Array2};

use super::{Model, ModelError, RelationParams};

/// A relation embedding, or the composition of several, in a form that
/// supports distance comparison.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationEmbedding {
    Vector(Array1<f64>),
    Matrix(Array2<f64>),
}

impl RelationEmbedding {
    fn shape_label(&self) -> String {
        match self {
            RelationEmbedding::Vector(v) => format!("vector[{}]", v.len()),
            RelationEmbedding::Matrix(m) => format!("matrix[{}x{}]", m.nrows(), m.ncols()),
        }
    }
}

impl Model {
    /// The embedding of a single relation, when the model kind composes.
    pub fn relation_embedding(&self, r: usize) -> Result<RelationEmbedding, ModelError> {
        match self.relation(r) {
            RelationParams::TransE { v } => Ok(RelationEmbedding::Vector(v.clone())),
            RelationParams::DistMult { diag } => Ok(RelationEmbedding::Vector(diag.clone())),
            RelationParams::Bilinear { m } => Ok(RelationEmbedding::Matrix(m.clone())),
            other => Err(ModelError::UnsupportedComposition {
                kind: other.kind().name(),
            }),
        }
    }

    /// Composes the embeddings of a relation path, in sequence order.
    pub fn compose_relations(&self, path: &[usize]) -> Result<RelationEmbedding, ModelError> {
        let (&first, rest) = path.split_first().ok_or(ModelError::EmptySequence)?;
        let mut composed = self.relation_embedding(first)?;
        for &r in rest {
            composed = match (composed, self.relation(r)) {
                (RelationEmbedding::Vector(acc), RelationParams::TransE { v }) => {
                    RelationEmbedding::Vector(acc + v)
                }
                (RelationEmbedding::Vector(acc), RelationParams::DistMult { diag }) => {
                    RelationEmbedding::Vector(acc * diag)
                }
                (RelationEmbedding::Matrix(acc), RelationParams::Bilinear { m }) => {
                    RelationEmbedding::Matrix(acc.dot(m))
                }
                (_, other) => {
                    return Err(ModelError::UnsupportedComposition {
                        kind: other.kind().name(),
                    })
                }
            };
        }
        Ok(composed)
    }
}

/// Euclidean distance for vector embeddings, Frobenius distance for matrix
/// embeddings.
pub fn relation_distance(
    a: &RelationEmbedding,
    b: &RelationEmbedding,
) -> Result<f64, ModelError> {
    match (a, b) {
        (RelationEmbedding::Vector(x), RelationEmbedding::Vector(y)) if x.len() == y.len() => {
            Ok(x.iter().zip(y.iter()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
        }
        (RelationEmbedding::Matrix(x), RelationEmbedding::Matrix(y)) if x.dim() == y.dim() => {
            Ok(x.iter().zip(y.iter()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
        }
        _ => Err(ModelError::ShapeMismatch {
            a: a.shape_label(),
            b: b.shape_label(),
        }),
    }
}
