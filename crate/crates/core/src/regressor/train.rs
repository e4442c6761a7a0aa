use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::{grad_total_loss, LossConfig, LossParts, PairBatch, PairEntry, PairLabel};
use crate::morphable_model::MorphableBasis;
use crate::synth_data::{Dataset, Sample, Split};

use super::model::{OutputGrad, RegressorModel};

/// Two sample indices and the genuine/impostor label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiamesePair {
    pub first: usize,
    pub second: usize,
    pub label: PairLabel,
}

/// Draws genuine and impostor pairs from a fixed set of samples.
#[derive(Debug, Clone)]
pub struct PairSampler {
    groups: Vec<Vec<usize>>,
    multi: Vec<usize>,
}

impl PairSampler {
    /// Groups the samples by identity; indices refer to positions in `samples`.
    pub fn new(samples: &[&Sample]) -> Self {
        let mut by_id: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for (i, s) in samples.iter().enumerate() {
            by_id.entry(s.identity_id).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = by_id.into_values().collect();
        let multi = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.len() >= 2)
            .map(|(i, _)| i)
            .collect();
        Self { groups, multi }
    }

    pub fn identity_count(&self) -> usize {
        self.groups.len()
    }

    /// Errors if a pair type with nonzero probability cannot be produced.
    pub fn check(&self, genuine_prob: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&genuine_prob) {
            return Err(Error::InvalidInput(format!(
                "genuine probability must lie in [0, 1], got {genuine_prob}"
            )));
        }
        if genuine_prob > 0.0 && self.multi.is_empty() {
            return Err(Error::InsufficientData(
                "no identity has two samples, so genuine pairs are impossible".into(),
            ));
        }
        if genuine_prob < 1.0 && self.groups.len() < 2 {
            return Err(Error::InsufficientData(
                "fewer than two identities, so impostor pairs are impossible".into(),
            ));
        }
        Ok(())
    }

    pub fn genuine(&self, rng: &mut impl Rng) -> SiamesePair {
        let group = &self.groups[self.multi[rng.random_range(0..self.multi.len())]];
        let a = rng.random_range(0..group.len());
        let mut b = rng.random_range(0..group.len() - 1);
        if b >= a {
            b += 1;
        }
        SiamesePair {
            first: group[a],
            second: group[b],
            label: PairLabel::Genuine,
        }
    }

    pub fn impostor(&self, rng: &mut impl Rng) -> SiamesePair {
        let n = self.groups.len();
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (ga, gb) = (&self.groups[a], &self.groups[b]);
        SiamesePair {
            first: ga[rng.random_range(0..ga.len())],
            second: gb[rng.random_range(0..gb.len())],
            label: PairLabel::Impostor,
        }
    }

    /// `count` independent draws; each is genuine with probability `genuine_prob`.
    pub fn sample(&self, count: usize, genuine_prob: f64, rng: &mut impl Rng) -> Result<Vec<SiamesePair>> {
        self.check(genuine_prob)?;
        Ok((0..count)
            .map(|_| {
                if rng.random_bool(genuine_prob) {
                    self.genuine(rng)
                } else {
                    self.impostor(rng)
                }
            })
            .collect())
    }
}

pub fn sample_pairs(
    samples: &[&Sample],
    count: usize,
    genuine_prob: f64,
    rng: &mut impl Rng,
) -> Result<Vec<SiamesePair>> {
    PairSampler::new(samples).sample(count, genuine_prob, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Pairs per SGD step.
    pub batch_size: usize,
    pub stage1_epochs: usize,
    pub stage2_epochs: usize,
    /// Steps per epoch; `None` means `ceil(training samples / batch_size)`.
    pub batches_per_epoch: Option<usize>,
    pub loss: LossConfig,
    pub seed: u64,
    pub genuine_prob: f64,
    /// Fit the model's input standardization to the training observations before stage 1.
    pub standardize_inputs: bool,
    /// Fit the model's output standardization to the training parameters before stage 1.
    pub standardize_outputs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            stage1_epochs: 40,
            stage2_epochs: 40,
            batches_per_epoch: None,
            loss: LossConfig::default(),
            seed: 0,
            genuine_prob: 0.5,
            standardize_inputs: true,
            standardize_outputs: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch size must be at least 1".into()));
        }
        if self.batches_per_epoch == Some(0) {
            return Err(Error::InvalidInput("batches per epoch must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.genuine_prob) {
            return Err(Error::InvalidInput(format!(
                "genuine probability must lie in [0, 1], got {}",
                self.genuine_prob
            )));
        }
        self.loss.validate()
    }
}

/// Loss values over one epoch, averaged per pair. `l3d`, `lshp`, `lid` are
/// unweighted; `total` uses the weights in effect for that epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub stage: u8,
    /// 1-based within the stage.
    pub epoch: usize,
    pub l3d: f64,
    pub lshp: f64,
    pub lid: f64,
    pub total: f64,
    pub w_3d: f64,
    pub w_shp: f64,
    pub w_id: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RegressorModel,
    pub trace: Vec<EpochRecord>,
}

/// Builds the loss batch for `pairs` by running the model on both members.
fn run_pairs(
    model: &RegressorModel,
    samples: &[&Sample],
    pairs: &[SiamesePair],
) -> Result<(PairBatch, Vec<[super::model::ForwardCache; 2]>)> {
    let mut entries = Vec::with_capacity(pairs.len());
    let mut caches = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (s1, s2) = (samples[p.first], samples[p.second]);
        let (o1, c1) = model.forward_cached(&s1.observation)?;
        let (o2, c2) = model.forward_cached(&s2.observation)?;
        entries.push(PairEntry {
            x1_pred: o1.params_pred.to_vec(),
            x1_gt: s1.params_gt.to_vec(),
            x2_pred: o2.params_pred.to_vec(),
            x2_gt: s2.params_gt.to_vec(),
            embed1: o1.embedding,
            embed2: o2.embedding,
            label: p.label,
        });
        caches.push([c1, c2]);
    }
    Ok((PairBatch::new(entries), caches))
}

/// One SGD step `W ← W − ∇(w_3d·ℓ_3d + w_shp·ℓ_shp + w_id·ℓ_id) / P` on the
/// given `P` pairs. Returns the unweighted parts and the weighted total, both
/// summed over the pairs, before the update.
pub fn sgd_step(
    model: &mut RegressorModel,
    samples: &[&Sample],
    pairs: &[SiamesePair],
    basis: &MorphableBasis,
    cfg: &LossConfig,
) -> Result<(LossParts, f64)> {
    let (batch, caches) = run_pairs(model, samples, pairs)?;
    let eval = grad_total_loss(&batch, basis, cfg)?;
    let mut grad_w = vec![0.0; model.weight_count()];
    for (g, [c1, c2]) in eval.grads.into_iter().zip(&caches) {
        let up1 = OutputGrad {
            params: g.x1_pred,
            embedding: g.embed1,
        };
        let up2 = OutputGrad {
            params: g.x2_pred,
            embedding: g.embed2,
        };
        model.backward_one(c1, &up1, &mut grad_w)?;
        model.backward_one(c2, &up2, &mut grad_w)?;
    }
    let inv = 1.0 / pairs.len().max(1) as f64;
    for (w, g) in model.weights_mut().iter_mut().zip(&grad_w) {
        *w -= g * inv;
    }
    Ok((eval.parts, eval.total))
}

/// Two-stage training on the training split.
///
/// Stage 1 minimizes `w_3d·ℓ_3d` only; stage 2 the full weighted sum. Within
/// each stage the term weights start at their configured values and are
/// multiplied by `gamma` after every epoch.
pub fn train(model: RegressorModel, dataset: &Dataset, basis: &MorphableBasis, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let samples: Vec<&Sample> = dataset.samples_in(Split::Train);
    if samples.is_empty() {
        return Err(Error::InvalidInput("dataset has no training samples".into()));
    }
    let sampler = PairSampler::new(&samples);
    sampler.check(cfg.genuine_prob)?;

    let mut model = model;
    if cfg.standardize_inputs {
        model.fit_input_standardization(samples.iter().map(|s| s.observation.as_slice()))?;
    }
    if cfg.standardize_outputs {
        model.fit_output_standardization(samples.iter().map(|s| s.params_gt.as_slice()))?;
    }
    let steps = cfg
        .batches_per_epoch
        .unwrap_or_else(|| samples.len().div_ceil(cfg.batch_size));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::with_capacity(cfg.stage1_epochs + cfg.stage2_epochs);

    for (stage, epochs) in [(1u8, cfg.stage1_epochs), (2u8, cfg.stage2_epochs)] {
        let base = if stage == 1 {
            LossConfig {
                w_shp: 0.0,
                w_id: 0.0,
                ..cfg.loss.clone()
            }
        } else {
            cfg.loss.clone()
        };
        for epoch in 1..=epochs {
            let loss_cfg = base.scaled(cfg.loss.gamma.powi(epoch as i32 - 1));
            let mut sum = LossParts::default();
            let mut sum_total = 0.0;
            for _ in 0..steps {
                let pairs = sampler.sample(cfg.batch_size, cfg.genuine_prob, &mut rng)?;
                let (parts, total) = sgd_step(&mut model, &samples, &pairs, basis, &loss_cfg)?;
                for (term, v) in [("l3d", parts.l3d), ("lshp", parts.lshp), ("lid", parts.lid), ("total", total)] {
                    if !v.is_finite() {
                        return Err(Error::Diverged { stage, epoch, term });
                    }
                }
                sum.l3d += parts.l3d;
                sum.lshp += parts.lshp;
                sum.lid += parts.lid;
                sum_total += total;
            }
            if model.weights().iter().any(|w| !w.is_finite()) {
                return Err(Error::Diverged {
                    stage,
                    epoch,
                    term: "weights",
                });
            }
            let n = (steps * cfg.batch_size) as f64;
            trace.push(EpochRecord {
                stage,
                epoch,
                l3d: sum.l3d / n,
                lshp: sum.lshp / n,
                lid: sum.lid / n,
                total: sum_total / n,
                w_3d: loss_cfg.w_3d,
                w_shp: loss_cfg.w_shp,
                w_id: loss_cfg.w_id,
            });
        }
    }
    Ok(TrainOutcome { model, trace })
}
