//! Independent oracles shared by the test suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use siamface::evaluation::Predictor;
use siamface::losses::*;
use siamface::morphable_model::*;
use siamface::synth_data::Sample;

use super::dd::{dd, norm, Dd};
use super::{random_basis, random_batch, rng, uniform_vec};

/// `‖V(a) − V(â_i)‖` for every `i`, by substituting entry `i` and projecting.
pub fn substitution_weights(a_gt: &[f64], a_pred: &[f64], basis: &MorphableBasis) -> Vec<f64> {
    let v_gt = sparse_landmarks(&ParamVector::unpack(a_gt).unwrap(), basis).unwrap();
    let raw: Vec<f64> = (0..N_PARAMS)
        .map(|i| {
            let mut hat = a_gt.to_vec();
            hat[i] = a_pred[i];
            let v = sparse_landmarks(&ParamVector::unpack(&hat).unwrap(), basis).unwrap();
            v.0.iter().zip(&v_gt.0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn transform(shape: &Shape3D, r: &[[f64; 3]; 3], t: [f64; 3]) -> Shape3D {
    Shape3D(
        shape
            .vertices()
            .flat_map(|p| (0..3).map(move |i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i]))
            .collect(),
    )
}

pub fn random_rotation(r: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    rotation_from_euler(
        r.random_range(-3.1..3.1),
        r.random_range(-1.5..1.5),
        r.random_range(-3.1..3.1),
    )
}

pub fn max_orthonormality_error(m: &[[f64; 3]; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
            worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn labels_for(n_gen: usize, n_imp: usize) -> Vec<PairLabel> {
    std::iter::repeat_n(PairLabel::Genuine, n_gen)
        .chain(std::iter::repeat_n(PairLabel::Impostor, n_imp))
        .collect()
}

/// Embeddings drawn independently of identity.
pub struct RandomEmbedding(pub u64);

impl Predictor for RandomEmbedding {
    fn predict(&self, sample: &Sample) -> siamface::Result<siamface::regressor::RegressorOutput> {
        let mut r = rng(self.0 ^ (u64::from(sample.identity_id) << 32) ^ u64::from(sample.pose_id));
        Ok(siamface::regressor::RegressorOutput {
            params_pred: sample.params_gt,
            embedding: uniform_vec(&mut r, 16, 1.0),
        })
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Flattens every prediction and embedding of a batch.
fn flatten(batch: &PairBatch) -> Vec<f64> {
    batch
        .pairs
        .iter()
        .flat_map(|p| p.x1_pred.iter().chain(&p.x2_pred).chain(&p.embed1).chain(&p.embed2).copied())
        .collect()
}

fn unflatten(template: &PairBatch, x: &[f64]) -> PairBatch {
    let mut out = template.clone();
    let mut it = x.iter().copied();
    for p in &mut out.pairs {
        for v in p
            .x1_pred
            .iter_mut()
            .chain(p.x2_pred.iter_mut())
            .chain(p.embed1.iter_mut())
            .chain(p.embed2.iter_mut())
        {
            *v = it.next().unwrap();
        }
    }
    out
}

/// The frozen-weight objective of one pair in double-double precision,
/// written from the loss definitions.
pub fn oracle_pair_objective(p: &PairEntry, w: &FrozenWeights, cfg: &LossConfig) -> Dd {
    let wpdc = |pred: &[f64], gt: &[f64], q: &[f64; N_PARAMS]| {
        super::dd::sum((0..N_PARAMS).map(|i| {
            let d = dd(pred[i]) - dd(gt[i]);
            dd(q[i]) * d * d
        }))
    };
    let contrastive = |d: Dd| match p.label {
        PairLabel::Genuine => dd(0.5) * d * d,
        PairLabel::Impostor => {
            let h = (dd(cfg.margin) - d).max0();
            let k = if cfg.symmetric_impostor { 0.5 } else { 1.0 };
            dd(k) * h * h
        }
    };
    let diff = |a: &[Dd], b: &[Dd]| a.iter().zip(b).map(|(x, y)| *x - *y).collect::<Vec<_>>();
    let to_dd = |v: &[f64]| v.iter().map(|&x| dd(x)).collect::<Vec<_>>();
    let l3d = wpdc(&p.x1_pred, &p.x1_gt, &w[0].q) + wpdc(&p.x2_pred, &p.x2_gt, &w[1].q);
    let lshp = contrastive(norm(&diff(&to_dd(&p.x1_pred[12..62]), &to_dd(&p.x2_pred[12..62]))));
    let (mut e1, mut e2) = (to_dd(&p.embed1), to_dd(&p.embed2));
    if cfg.normalize_embeddings {
        let (n1, n2) = (norm(&e1), norm(&e2));
        e1.iter_mut().for_each(|x| *x = *x / n1);
        e2.iter_mut().for_each(|x| *x = *x / n2);
    }
    let lid = contrastive(norm(&diff(&e1, &e2)));
    dd(cfg.w_3d) * l3d + dd(cfg.w_shp) * lshp + dd(cfg.w_id) * lid
}

/// Checks every entry of the analytic gradient against a central difference
/// (step 1e-6) of the frozen-weight objective. The objective is a sum over
/// pairs, so each entry is differenced on the pair that owns it, evaluated in
/// double-double so that round-off stays far below the tolerance.
pub fn check_gradient(cfg: &LossConfig, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let basis = random_basis(&mut r, 18, 6);
    let batch = random_batch(&mut r, 3, 4);
    let eval = grad_total_loss(&batch, &basis, cfg).unwrap();
    let mut worst: f64 = 0.0;
    for (j, pair) in batch.pairs.iter().enumerate() {
        let single = PairBatch::new(vec![pair.clone()]);
        let x = flatten(&single);
        let f = |x: &[f64]| oracle_pair_objective(&unflatten(&single, x).pairs[0], &eval.weights[j], cfg);
        // The oracle and the library agree on the objective itself.
        let lib = total_loss_frozen(&single, &eval.weights[j..j + 1], cfg).unwrap().0;
        if (f(&x).to_f64() - lib).abs() > 1e-12 * lib.abs().max(1.0) {
            return Err(format!("seed {seed} pair {j}: oracle objective {} vs library {lib}", f(&x).to_f64()));
        }
        let g = &eval.grads[j];
        let analytic: Vec<f64> = g.x1_pred.iter().chain(&g.x2_pred).chain(&g.embed1).chain(&g.embed2).copied().collect();
        for (i, a) in analytic.iter().enumerate() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = ((f(&xp) - f(&xm)) / (dd(xp[i]) - dd(xm[i]))).to_f64();
            if a.abs() > 1e-8 || fd.abs() > 1e-8 {
                let e = rel_err(*a, fd);
                worst = worst.max(e);
                if e >= 1e-5 {
                    return Err(format!("seed {seed} pair {j} entry {i}: analytic {a} vs fd {fd}"));
                }
            }
        }
    }
    Ok(worst)
}

