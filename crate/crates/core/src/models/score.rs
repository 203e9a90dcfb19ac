//! Triple scoring, batched candidate scoring, and analytic score gradients.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::kb::Triple;

use super::{Model, Projection, RelationParams, Slot};

/// Scores a pair of already-projected entity vectors under one relation's
/// parameters.
///
/// The translation variant uses the expanded quadratic form
/// `-(2 vᵀ(y1-y2) - 2 y1ᵀy2 + ‖v‖²)`, which equals `-‖y1-y2+v‖² + 2` when
/// both entity vectors have unit norm.
pub fn score_projected(params: &RelationParams, y1: ArrayView1<f64>, y2: ArrayView1<f64>) -> f64 {
    match params {
        RelationParams::TransE { v } => {
            let g_a = v.dot(&y1) - v.dot(&y2);
            let g_b = y1.dot(&y2);
            -(2.0 * g_a - 2.0 * g_b + v.dot(v))
        }
        RelationParams::DistMult { diag } => y1
            .iter()
            .zip(diag.iter())
            .zip(y2.iter())
            .map(|((a, w), b)| a * w * b)
            .sum(),
        RelationParams::Bilinear { m } => y1.dot(&m.dot(&y2)),
        RelationParams::BilinearLinear { t, q1, q2 } => {
            y1.dot(&t.dot(&y2)) + q1.dot(&y1) + q2.dot(&y2)
        }
        RelationParams::Ntn { t, q1, q2, u } => {
            let z = ntn_preactivation(t, q1, q2, y1, y2);
            z.mapv(f64::tanh).dot(u)
        }
    }
}

/// Per-slice preactivation g_a + g_b for the tensor variant.
fn ntn_preactivation(
    t: &ndarray::Array3<f64>,
    q1: &Array2<f64>,
    q2: &Array2<f64>,
    y1: ArrayView1<f64>,
    y2: ArrayView1<f64>,
) -> Array1<f64> {
    let mut z = q1.t().dot(&y1) + q2.t().dot(&y2);
    for (k, zk) in z.iter_mut().enumerate() {
        let slice = t.index_axis(Axis(0), k);
        *zk += y1.dot(&slice.dot(&y2));
    }
    z
}

/// Partial derivatives of a triple's score with respect to the stored
/// subject row, stored object row, and the relation's parameters. Projection
/// through tanh is chained into the entity gradients.
///
/// For a self-loop triple (subject == object) the two entity gradients are
/// reported separately; accumulation into the shared row is the caller's
/// responsibility.
#[derive(Clone, Debug)]
pub struct ScoreGrad {
    pub subject: Array1<f64>,
    pub object: Array1<f64>,
    pub relation: RelationParams,
}

impl Model {
    /// Score of a triple, higher = more plausible.
    pub fn score(&self, triple: &Triple) -> f64 {
        let y1 = self.project_entity(triple.subject);
        let y2 = self.project_entity(triple.object);
        score_projected(self.relation(triple.relation), y1.view(), y2.view())
    }

    /// Analytic gradients of [`score`](Self::score) for one triple.
    pub fn score_grad(&self, triple: &Triple) -> ScoreGrad {
        let y1 = self.project_entity(triple.subject);
        let y2 = self.project_entity(triple.object);
        let (dy1, dy2, relation) = projected_grad(self.relation(triple.relation), &y1, &y2);
        ScoreGrad {
            subject: self.chain_projection(triple.subject, &y1, dy1),
            object: self.chain_projection(triple.object, &y2, dy2),
            relation,
        }
    }

    /// d(score)/d(stored row) from d(score)/d(projected vector).
    fn chain_projection(&self, _id: usize, projected: &Array1<f64>, dy: Array1<f64>) -> Array1<f64> {
        match self.projection() {
            Projection::Linear => dy,
            // y = tanh(x) so dy/dx = 1 - y^2
            Projection::Tanh => {
                let mut dx = dy;
                dx.zip_mut_with(projected, |g, y| *g *= 1.0 - y * y);
                dx
            }
        }
    }

    /// Scores every candidate entity substituted into `slot`, as a length-n_e
    /// vector. `projected` must be the projected entity table and `fixed` the
    /// projected vector of the entity occupying the other slot.
    pub fn score_all(
        &self,
        projected: &Array2<f64>,
        fixed: &Array1<f64>,
        relation: usize,
        slot: Slot,
    ) -> Array1<f64> {
        match self.relation(relation) {
            RelationParams::TransE { v } => {
                // linear in the candidate vector: score = cᵀq + b
                let (q, b) = match slot {
                    Slot::Object => (2.0 * v + 2.0 * fixed, -2.0 * v.dot(fixed) - v.dot(v)),
                    Slot::Subject => (-2.0 * v + 2.0 * fixed, 2.0 * v.dot(fixed) - v.dot(v)),
                };
                projected.dot(&q) + b
            }
            RelationParams::DistMult { diag } => {
                let q = diag * fixed;
                projected.dot(&q)
            }
            RelationParams::Bilinear { m } => {
                let q = match slot {
                    Slot::Object => m.t().dot(fixed),
                    Slot::Subject => m.dot(fixed),
                };
                projected.dot(&q)
            }
            RelationParams::BilinearLinear { t, q1, q2 } => {
                let (q, b) = match slot {
                    Slot::Object => (t.t().dot(fixed) + q2, q1.dot(fixed)),
                    Slot::Subject => (t.dot(fixed) + q1, q2.dot(fixed)),
                };
                projected.dot(&q) + b
            }
            RelationParams::Ntn { t, q1, q2, u } => {
                // per slice the preactivation is linear in the candidate
                let m = u.len();
                let d = fixed.len();
                let mut w = Array2::zeros((d, m));
                let mut b = Array1::zeros(m);
                for k in 0..m {
                    let slice = t.index_axis(Axis(0), k);
                    let (col, bias) = match slot {
                        Slot::Object => (
                            slice.t().dot(fixed) + q2.column(k),
                            q1.column(k).dot(fixed),
                        ),
                        Slot::Subject => (
                            slice.dot(fixed) + q1.column(k),
                            q2.column(k).dot(fixed),
                        ),
                    };
                    w.column_mut(k).assign(&col);
                    b[k] = bias;
                }
                let mut z = projected.dot(&w);
                z += &b;
                z.mapv_inplace(f64::tanh);
                z.dot(u)
            }
        }
    }
}

/// Gradients with respect to the projected entity vectors and the relation
/// parameters.
fn projected_grad(
    params: &RelationParams,
    y1: &Array1<f64>,
    y2: &Array1<f64>,
) -> (Array1<f64>, Array1<f64>, RelationParams) {
    match params {
        RelationParams::TransE { v } => {
            let dy1 = -2.0 * v + 2.0 * y2;
            let dy2 = 2.0 * v + 2.0 * y1;
            let dv = -2.0 * (y1 - y2 + v);
            (dy1, dy2, RelationParams::TransE { v: dv })
        }
        RelationParams::DistMult { diag } => {
            let dy1 = diag * y2;
            let dy2 = diag * y1;
            let ddiag = y1 * y2;
            (dy1, dy2, RelationParams::DistMult { diag: ddiag })
        }
        RelationParams::Bilinear { m } => {
            let dy1 = m.dot(y2);
            let dy2 = m.t().dot(y1);
            let dm = outer(y1, y2);
            (dy1, dy2, RelationParams::Bilinear { m: dm })
        }
        RelationParams::BilinearLinear { t, q1, q2 } => {
            let dy1 = t.dot(y2) + q1;
            let dy2 = t.t().dot(y1) + q2;
            let dt = outer(y1, y2);
            (
                dy1,
                dy2,
                RelationParams::BilinearLinear {
                    t: dt,
                    q1: y1.clone(),
                    q2: y2.clone(),
                },
            )
        }
        RelationParams::Ntn { t, q1, q2, u } => {
            let m = u.len();
            let d = y1.len();
            let z = ntn_preactivation(t, q1, q2, y1.view(), y2.view());
            let h = z.mapv(f64::tanh);
            // d(score)/dz_k = u_k (1 - h_k^2)
            let coef: Array1<f64> =
                u.iter().zip(h.iter()).map(|(uk, hk)| uk * (1.0 - hk * hk)).collect();
            let mut dy1 = q1.dot(&coef);
            let mut dy2 = q2.dot(&coef);
            let mut dt = ndarray::Array3::zeros((m, d, d));
            for k in 0..m {
                let slice = t.index_axis(Axis(0), k);
                dy1 += &(coef[k] * &slice.dot(y2));
                dy2 += &(coef[k] * &slice.t().dot(y1));
                dt.index_axis_mut(Axis(0), k)
                    .assign(&(coef[k] * &outer(y1, y2)));
            }
            let dq1 = outer(y1, &coef);
            let dq2 = outer(y2, &coef);
            (
                dy1,
                dy2,
                RelationParams::Ntn {
                    t: dt,
                    q1: dq1,
                    q2: dq2,
                    u: h,
                },
            )
        }
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
}
