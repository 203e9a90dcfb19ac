//! Analytic gradients vs central finite differences, for every model kind,
//! both projection modes, and every parameter block. The differencing code
//! below is deliberately independent of the gradient implementation: it only
//! calls `score` on perturbed copies of the model.

use kgembed_core::kb::Triple;
use kgembed_core::models::{Model, ModelKind, Projection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6)
}

/// Central difference of the score with respect to one stored entity
/// coordinate.
fn fd_entity(model: &Model, triple: &Triple, entity: usize, coord: usize) -> f64 {
    let mut plus = model.clone();
    plus.entity_table_mut()[(entity, coord)] += H;
    let mut minus = model.clone();
    minus.entity_table_mut()[(entity, coord)] -= H;
    (plus.score(triple) - minus.score(triple)) / (2.0 * H)
}

/// Central difference with respect to one relation parameter coordinate,
/// addressed through the canonical block layout.
fn fd_relation(model: &Model, triple: &Triple, block: usize, coord: usize) -> f64 {
    let mut plus = model.clone();
    plus.relation_mut(triple.relation).blocks_mut()[block][coord] += H;
    let mut minus = model.clone();
    minus.relation_mut(triple.relation).blocks_mut()[block][coord] -= H;
    (plus.score(triple) - minus.score(triple)) / (2.0 * H)
}

fn check_triple(model: &Model, triple: &Triple) -> f64 {
    let grad = model.score_grad(triple);
    let d = model.d();
    let mut worst = 0.0f64;

    if triple.subject == triple.object {
        // self-loop: both entity gradients accumulate into the same row
        for coord in 0..d {
            let analytic = grad.subject[coord] + grad.object[coord];
            let numeric = fd_entity(model, triple, triple.subject, coord);
            worst = worst.max(relative_error(analytic, numeric));
        }
    } else {
        for coord in 0..d {
            let numeric = fd_entity(model, triple, triple.subject, coord);
            worst = worst.max(relative_error(grad.subject[coord], numeric));
            let numeric = fd_entity(model, triple, triple.object, coord);
            worst = worst.max(relative_error(grad.object[coord], numeric));
        }
    }

    for (block_idx, block) in grad.relation.blocks().iter().enumerate() {
        for (coord, &analytic) in block.iter().enumerate() {
            let numeric = fd_relation(model, triple, block_idx, coord);
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_e = 6;
    let n_r = 3;
    let d = 8;
    for kind in ModelKind::ALL {
        for projection in [Projection::Linear, Projection::Tanh] {
            let mut worst = 0.0f64;
            for draw in 0..20 {
                let model = Model::init(kind, n_e, n_r, d, projection, rng.gen());
                let triple = Triple::new(
                    rng.gen_range(0..n_e),
                    rng.gen_range(0..n_r),
                    rng.gen_range(0..n_e),
                );
                let err = check_triple(&model, &triple);
                assert!(
                    err <= TOLERANCE,
                    "{kind:?}/{projection:?} draw {draw}: max relative error {err}"
                );
                worst = worst.max(err);
            }
            eprintln!("{kind:?}/{projection:?}: worst relative error {worst:.3e}");
        }
    }
}

#[test]
fn gradients_match_on_self_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in ModelKind::ALL {
        let model = Model::init(kind, 4, 2, 6, Projection::Tanh, rng.gen());
        let triple = Triple::new(2, 1, 2);
        let err = check_triple(&model, &triple);
        assert!(err <= TOLERANCE, "{kind:?} self-loop: relative error {err}");
    }
}
