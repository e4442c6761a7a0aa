#![allow(dead_code)]

pub mod dd;
pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siamface::losses::{PairBatch, PairEntry, PairLabel};
use siamface::morphable_model::{MorphableBasis, ParamVector, N_EXP, N_SHAPE};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half_width..half_width)).collect()
}

/// Dense random basis with no structure; landmarks are the first `landmarks` vertices.
pub fn random_basis(rng: &mut ChaCha8Rng, vertices: usize, landmarks: usize) -> MorphableBasis {
    let rows = 3 * vertices;
    MorphableBasis::new(
        uniform_vec(rng, rows, 1.0),
        uniform_vec(rng, rows * N_SHAPE, 0.1),
        uniform_vec(rng, rows * N_EXP, 0.1),
        (0..landmarks).collect(),
    )
    .unwrap()
}

/// Parameters with a near-rotation `R`, scale around 1 and small coefficients.
pub fn random_params(rng: &mut ChaCha8Rng) -> ParamVector {
    let mut p = ParamVector::identity();
    p.f = rng.random_range(0.7..1.3);
    let r = siamface::morphable_model::rotation_from_euler(
        rng.random_range(-1.2..1.2),
        rng.random_range(-0.4..0.4),
        rng.random_range(-0.4..0.4),
    );
    p.r = r;
    p.t2d = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    for u in p.u_shp.iter_mut().chain(p.u_exp.iter_mut()) {
        *u = rng.random_range(-1.0..1.0);
    }
    p
}

pub fn perturbed(rng: &mut ChaCha8Rng, a: &[f64], scale: f64) -> Vec<f64> {
    a.iter().map(|x| x + rng.random_range(-scale..scale)).collect()
}

/// Random pairs with predictions near the ground truth and random embeddings.
pub fn random_batch(rng: &mut ChaCha8Rng, pairs: usize, embed_dim: usize) -> PairBatch {
    PairBatch::new(
        (0..pairs)
            .map(|j| {
                let x1_gt = random_params(rng).pack().to_vec();
                let x2_gt = random_params(rng).pack().to_vec();
                PairEntry {
                    x1_pred: perturbed(rng, &x1_gt, 0.3),
                    x2_pred: perturbed(rng, &x2_gt, 0.3),
                    x1_gt,
                    x2_gt,
                    embed1: uniform_vec(rng, embed_dim, 0.5),
                    embed2: uniform_vec(rng, embed_dim, 0.5),
                    label: if j % 2 == 0 { PairLabel::Genuine } else { PairLabel::Impostor },
                }
            })
            .collect(),
    )
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}

