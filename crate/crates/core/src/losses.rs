//! Training objectives: weighted parameter distance cost (WPDC), contrastive
//! losses over the shape block and the identity embedding, their weighted
//! total, and analytic gradients with respect to every predicted quantity.

use crate::error::{check_len, Error, Result};
use crate::morphable_model::{
    MorphableBasis, ParamVector, IDX_EXPRESSION, IDX_ROTATION, IDX_SCALE, IDX_SHAPE, IDX_TRANSLATION,
    N_PARAMS, SHAPE_BLOCK,
};

/// Below this total raw weight the importance weights fall back to uniform.
pub const DEGENERATE_WEIGHT_SUM: f64 = 1e-12;

/// Diagonal of the WPDC importance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WpdcWeights {
    pub q: [f64; N_PARAMS],
    /// Set when prediction and ground truth project identically and the uniform fallback was used.
    pub degenerate: bool,
}

impl WpdcWeights {
    pub fn uniform() -> Self {
        Self {
            q: [1.0 / N_PARAMS as f64; N_PARAMS],
            degenerate: true,
        }
    }
}

/// Margin, per-term weights and variant switches for the combined objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    pub margin: f64,
    pub w_3d: f64,
    pub w_shp: f64,
    pub w_id: f64,
    /// Per-epoch multiplicative decay of the three term weights.
    pub gamma: f64,
    /// Use `½·max(0, m − d)²` for impostors instead of `max(0, m − d)²`.
    pub symmetric_impostor: bool,
    /// L2-normalize identity embeddings before measuring their distance.
    pub normalize_embeddings: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            margin: 1.0,
            w_3d: 1e-2,
            w_shp: 1e-3,
            w_id: 1e-4,
            gamma: 0.95,
            symmetric_impostor: false,
            normalize_embeddings: false,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidInput(format!("margin must be positive, got {}", self.margin)));
        }
        for (name, w) in [("w_3d", self.w_3d), ("w_shp", self.w_shp), ("w_id", self.w_id)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be nonnegative, got {w}")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidInput(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    /// Copy with all three term weights multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            w_3d: self.w_3d * factor,
            w_shp: self.w_shp * factor,
            w_id: self.w_id * factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Genuine,
    Impostor,
}

impl PairLabel {
    /// `Y` in the contrastive loss: 1 for genuine, 0 for impostor.
    pub fn y(self) -> u8 {
        match self {
            PairLabel::Genuine => 1,
            PairLabel::Impostor => 0,
        }
    }

    pub fn from_y(y: u8) -> Result<Self> {
        match y {
            1 => Ok(PairLabel::Genuine),
            0 => Ok(PairLabel::Impostor),
            other => Err(Error::InvalidInput(format!("pair label must be 0 or 1, got {other}"))),
        }
    }
}

/// One Siamese training pair: predictions, ground truth and embeddings for both members.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    pub x1_pred: Vec<f64>,
    pub x1_gt: Vec<f64>,
    pub x2_pred: Vec<f64>,
    pub x2_gt: Vec<f64>,
    pub embed1: Vec<f64>,
    pub embed2: Vec<f64>,
    pub label: PairLabel,
}

impl PairEntry {
    fn validate(&self) -> Result<()> {
        check_len("x1_pred", N_PARAMS, &self.x1_pred)?;
        check_len("x1_gt", N_PARAMS, &self.x1_gt)?;
        check_len("x2_pred", N_PARAMS, &self.x2_pred)?;
        check_len("x2_gt", N_PARAMS, &self.x2_gt)?;
        check_len("embed2", self.embed1.len(), &self.embed2)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairBatch {
    pub pairs: Vec<PairEntry>,
}

impl PairBatch {
    pub fn new(pairs: Vec<PairEntry>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.pairs.iter().try_for_each(PairEntry::validate)
    }
}

/// Unweighted values of the three loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub l3d: f64,
    pub lshp: f64,
    pub lid: f64,
}

/// Gradients of the weighted total with respect to one pair's predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrad {
    pub x1_pred: [f64; N_PARAMS],
    pub x2_pred: [f64; N_PARAMS],
    pub embed1: Vec<f64>,
    pub embed2: Vec<f64>,
}

/// Importance weights of one pair, frozen at the point where they were computed.
pub type FrozenWeights = [WpdcWeights; 2];

/// Landmark displacement per unit change of each parameter, evaluated at `a_gt`.
///
/// Every single-entry substitution moves the projected landmarks linearly, so
/// `‖V(a) − V(â_i)‖ = |â_i − a_i| · sensitivity_i` exactly.
fn landmark_sensitivities(gt: &ParamVector, basis: &MorphableBasis) -> [f64; N_PARAMS] {
    let r = &gt.r;
    let f = gt.f.abs();
    let mut sq = [0.0; N_PARAMS];
    let mut coord_sq = [0.0; 3];
    for &v in basis.landmark_indices() {
        let s = basis.vertex(v, &gt.u_shp, &gt.u_exp);
        for c in 0..3 {
            coord_sq[c] += s[c] * s[c];
        }
        let px = r[0][0] * s[0] + r[0][1] * s[1] + r[0][2] * s[2];
        let py = r[1][0] * s[0] + r[1][1] * s[1] + r[1][2] * s[2];
        sq[IDX_SCALE] += px * px + py * py;
        for (k, slot) in IDX_SHAPE.enumerate() {
            let col = [0, 1, 2].map(|c| basis.shape_row(3 * v + c)[k]);
            let cx = r[0][0] * col[0] + r[0][1] * col[1] + r[0][2] * col[2];
            let cy = r[1][0] * col[0] + r[1][1] * col[1] + r[1][2] * col[2];
            sq[slot] += cx * cx + cy * cy;
        }
        for (k, slot) in IDX_EXPRESSION.enumerate() {
            let col = [0, 1, 2].map(|c| basis.expression_row(3 * v + c)[k]);
            let cx = r[0][0] * col[0] + r[0][1] * col[1] + r[0][2] * col[2];
            let cy = r[1][0] * col[0] + r[1][1] * col[1] + r[1][2] * col[2];
            sq[slot] += cx * cx + cy * cy;
        }
    }
    let mut sens = [0.0; N_PARAMS];
    sens[IDX_SCALE] = sq[IDX_SCALE].sqrt();
    // Only the first two rotation rows survive the orthographic projection.
    for (i, slot) in IDX_ROTATION.enumerate() {
        let (row, col) = (i / 3, i % 3);
        if row < 2 {
            sens[slot] = f * coord_sq[col].sqrt();
        }
    }
    let n_landmarks = basis.landmark_count() as f64;
    for slot in IDX_TRANSLATION {
        sens[slot] = n_landmarks.sqrt();
    }
    for slot in IDX_SHAPE.chain(IDX_EXPRESSION) {
        sens[slot] = f * sq[slot].sqrt();
    }
    sens
}

/// Importance weights `q_i ∝ ‖V(a) − V(â_i)‖`, where `â_i` is the ground truth
/// with entry `i` taken from the prediction, normalized to sum to one.
pub fn wpdc_weights(a_gt: &[f64], a_pred: &[f64], basis: &MorphableBasis) -> Result<WpdcWeights> {
    check_len("a_gt", N_PARAMS, a_gt)?;
    check_len("a_pred", N_PARAMS, a_pred)?;
    if basis.landmark_count() == 0 {
        return Err(Error::InvalidInput("basis has no landmark indices".into()));
    }
    let gt = ParamVector::unpack(a_gt)?;
    let sens = landmark_sensitivities(&gt, basis);
    let mut q = [0.0; N_PARAMS];
    for i in 0..N_PARAMS {
        q[i] = (a_pred[i] - a_gt[i]).abs() * sens[i];
    }
    let total: f64 = q.iter().sum();
    if !(total >= DEGENERATE_WEIGHT_SUM) {
        return Ok(WpdcWeights::uniform());
    }
    q.iter_mut().for_each(|x| *x /= total);
    Ok(WpdcWeights { q, degenerate: false })
}

/// `Σ_i q_i (a_i − â_i)²`.
pub fn wpdc_loss(a_gt: &[f64], a_pred: &[f64], weights: &WpdcWeights) -> Result<f64> {
    check_len("a_gt", N_PARAMS, a_gt)?;
    check_len("a_pred", N_PARAMS, a_pred)?;
    Ok(a_gt
        .iter()
        .zip(a_pred)
        .zip(&weights.q)
        .map(|((a, b), q)| q * (a - b) * (a - b))
        .sum())
}

/// Fresh importance weights for both members of every pair.
pub fn batch_weights(batch: &PairBatch, basis: &MorphableBasis) -> Result<Vec<FrozenWeights>> {
    batch
        .pairs
        .iter()
        .map(|p| {
            Ok([
                wpdc_weights(&p.x1_gt, &p.x1_pred, basis)?,
                wpdc_weights(&p.x2_gt, &p.x2_pred, basis)?,
            ])
        })
        .collect()
}

/// Sum over pairs of both members' WPDC, each with freshly computed weights.
/// An empty batch gives 0.
pub fn loss_3d(batch: &PairBatch, basis: &MorphableBasis) -> Result<f64> {
    batch.validate()?;
    let weights = batch_weights(batch, basis)?;
    loss_3d_frozen(batch, &weights)
}

/// [`loss_3d`] with importance weights held fixed.
pub fn loss_3d_frozen(batch: &PairBatch, weights: &[FrozenWeights]) -> Result<f64> {
    if weights.len() != batch.len() {
        return Err(Error::dim("frozen weights", batch.len(), weights.len()));
    }
    let mut total = 0.0;
    for (p, [w1, w2]) in batch.pairs.iter().zip(weights) {
        total += wpdc_loss(&p.x1_gt, &p.x1_pred, w1)? + wpdc_loss(&p.x2_gt, &p.x2_pred, w2)?;
    }
    Ok(total)
}

/// Euclidean distance between two equal-length vectors.
pub fn pair_distance(v1: &[f64], v2: &[f64]) -> Result<f64> {
    check_len("pair_distance operand", v1.len(), v2)?;
    Ok(v1.iter().zip(v2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Contrastive loss of one pair at distance `d`:
/// genuine `½d²`, impostor `max(0, m − d)²` (or `½max(0, m − d)²` when `symmetric`).
pub fn contrastive_loss(d: f64, label: PairLabel, margin: f64, symmetric: bool) -> f64 {
    match label {
        PairLabel::Genuine => 0.5 * d * d,
        PairLabel::Impostor => {
            let h = (margin - d).max(0.0);
            if symmetric {
                0.5 * h * h
            } else {
                h * h
            }
        }
    }
}

/// Derivative of [`contrastive_loss`] with respect to `d`. Zero at and beyond the margin.
pub fn contrastive_loss_grad(d: f64, label: PairLabel, margin: f64, symmetric: bool) -> f64 {
    match label {
        PairLabel::Genuine => d,
        PairLabel::Impostor => {
            if d >= margin {
                0.0
            } else if symmetric {
                -(margin - d)
            } else {
                -2.0 * (margin - d)
            }
        }
    }
}

fn l2_normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-12 {
        return v.to_vec();
    }
    v.iter().map(|x| x / n).collect()
}

/// Backpropagates through `v / ‖v‖`.
fn l2_normalize_backward(v: &[f64], grad_out: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-12 {
        return grad_out.to_vec();
    }
    let u: Vec<f64> = v.iter().map(|x| x / n).collect();
    let proj: f64 = u.iter().zip(grad_out).map(|(a, b)| a * b).sum();
    grad_out.iter().zip(&u).map(|(g, ui)| (g - proj * ui) / n).collect()
}

/// Contrastive shape loss summed over pairs, on the 50-entry predicted shape blocks.
pub fn loss_shp(batch: &PairBatch, cfg: &LossConfig) -> Result<f64> {
    batch.validate()?;
    let mut total = 0.0;
    for p in &batch.pairs {
        let d = pair_distance(&p.x1_pred[SHAPE_BLOCK], &p.x2_pred[SHAPE_BLOCK])?;
        total += contrastive_loss(d, p.label, cfg.margin, cfg.symmetric_impostor);
    }
    Ok(total)
}

fn embedding_distance(p: &PairEntry, normalize: bool) -> Result<f64> {
    if normalize {
        pair_distance(&l2_normalized(&p.embed1), &l2_normalized(&p.embed2))
    } else {
        pair_distance(&p.embed1, &p.embed2)
    }
}

/// Contrastive identity loss summed over pairs, on the identity embeddings.
pub fn loss_id(batch: &PairBatch, cfg: &LossConfig) -> Result<f64> {
    batch.validate()?;
    let mut total = 0.0;
    for p in &batch.pairs {
        let d = embedding_distance(p, cfg.normalize_embeddings)?;
        total += contrastive_loss(d, p.label, cfg.margin, cfg.symmetric_impostor);
    }
    Ok(total)
}

/// Weighted total `w_3d·ℓ_3d + w_shp·ℓ_shp + w_id·ℓ_id` and the unweighted parts.
pub fn total_loss(batch: &PairBatch, basis: &MorphableBasis, cfg: &LossConfig) -> Result<(f64, LossParts)> {
    batch.validate()?;
    let weights = batch_weights(batch, basis)?;
    total_loss_frozen(batch, &weights, cfg)
}

/// [`total_loss`] with the WPDC weights held fixed; the function that
/// [`grad_total_loss`] differentiates.
pub fn total_loss_frozen(batch: &PairBatch, weights: &[FrozenWeights], cfg: &LossConfig) -> Result<(f64, LossParts)> {
    let parts = LossParts {
        l3d: loss_3d_frozen(batch, weights)?,
        lshp: loss_shp(batch, cfg)?,
        lid: loss_id(batch, cfg)?,
    };
    Ok((combine(&parts, cfg), parts))
}

fn combine(parts: &LossParts, cfg: &LossConfig) -> f64 {
    cfg.w_3d * parts.l3d + cfg.w_shp * parts.lshp + cfg.w_id * parts.lid
}

/// Loss value, parts, the frozen importance weights and per-pair gradients.
#[derive(Debug, Clone)]
pub struct LossEvaluation {
    pub total: f64,
    pub parts: LossParts,
    pub weights: Vec<FrozenWeights>,
    pub grads: Vec<PairGrad>,
}

/// Adds the gradient of `L(‖a − b‖)` with respect to `a` and `b` into the output slices.
fn accumulate_distance_grad(a: &[f64], b: &[f64], dl_dd: f64, ga: &mut [f64], gb: &mut [f64]) {
    let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    if d == 0.0 || dl_dd == 0.0 {
        return;
    }
    let s = dl_dd / d;
    for i in 0..a.len() {
        let g = s * (a[i] - b[i]);
        ga[i] += g;
        gb[i] -= g;
    }
}

/// Gradients of the weighted total with respect to every predicted parameter
/// vector and every embedding. Importance weights are treated as constants.
pub fn grad_total_loss(batch: &PairBatch, basis: &MorphableBasis, cfg: &LossConfig) -> Result<LossEvaluation> {
    batch.validate()?;
    let weights = batch_weights(batch, basis)?;
    let (total, parts) = total_loss_frozen(batch, &weights, cfg)?;
    let mut grads = Vec::with_capacity(batch.len());
    for (p, [w1, w2]) in batch.pairs.iter().zip(&weights) {
        let mut g = PairGrad {
            x1_pred: [0.0; N_PARAMS],
            x2_pred: [0.0; N_PARAMS],
            embed1: vec![0.0; p.embed1.len()],
            embed2: vec![0.0; p.embed2.len()],
        };
        for i in 0..N_PARAMS {
            g.x1_pred[i] = cfg.w_3d * 2.0 * w1.q[i] * (p.x1_pred[i] - p.x1_gt[i]);
            g.x2_pred[i] = cfg.w_3d * 2.0 * w2.q[i] * (p.x2_pred[i] - p.x2_gt[i]);
        }

        if cfg.w_shp != 0.0 {
            let (b1, b2) = (&p.x1_pred[SHAPE_BLOCK], &p.x2_pred[SHAPE_BLOCK]);
            let d = pair_distance(b1, b2)?;
            let dl_dd = cfg.w_shp * contrastive_loss_grad(d, p.label, cfg.margin, cfg.symmetric_impostor);
            let (g1, g2) = (&mut g.x1_pred[SHAPE_BLOCK], &mut g.x2_pred[SHAPE_BLOCK]);
            accumulate_distance_grad(b1, b2, dl_dd, g1, g2);
        }

        if cfg.w_id != 0.0 {
            let (e1, e2) = if cfg.normalize_embeddings {
                (l2_normalized(&p.embed1), l2_normalized(&p.embed2))
            } else {
                (p.embed1.clone(), p.embed2.clone())
            };
            let d = pair_distance(&e1, &e2)?;
            let dl_dd = cfg.w_id * contrastive_loss_grad(d, p.label, cfg.margin, cfg.symmetric_impostor);
            accumulate_distance_grad(&e1, &e2, dl_dd, &mut g.embed1, &mut g.embed2);
            if cfg.normalize_embeddings {
                g.embed1 = l2_normalize_backward(&p.embed1, &g.embed1);
                g.embed2 = l2_normalize_backward(&p.embed2, &g.embed2);
            }
        }
        grads.push(g);
    }
    Ok(LossEvaluation {
        total,
        parts,
        weights,
        grads,
    })
}
