//! Reconstruction robustness and verification protocols: rigid alignment,
//! NME, per-identity box statistics, error distribution curves and k-fold ROC.

mod align;
mod metrics;
pub mod tables;
mod verification;

use std::collections::BTreeMap;

pub use align::{rigid_align, AlignMode, RigidAlignment};
pub use metrics::{
    bbox_size, default_edc_thresholds, edc_curve, nme, per_identity_boxstats, quantile_sorted, BoxStats, EvalRecord,
};
pub use verification::{
    best_threshold, kfold_verification, roc_curve, select_verification_pairs, verification_eval, RocResult,
    VerifyConfig, VerifyMetric,
};

use crate::error::Result;
use crate::morphable_model::{reconstruct_shape, MorphableBasis, IDX_EXPRESSION, IDX_SHAPE, SHAPE_BLOCK};
use crate::regressor::{RegressorModel, RegressorOutput};
use crate::synth_data::Sample;

/// Anything that maps a sample to parameter and embedding predictions.
pub trait Predictor {
    fn predict(&self, sample: &Sample) -> Result<RegressorOutput>;
}

impl Predictor for RegressorModel {
    fn predict(&self, sample: &Sample) -> Result<RegressorOutput> {
        self.forward(&sample.observation)
    }
}

/// Returns the ground-truth parameters; the embedding is the identity coefficients.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleModel;

impl Predictor for OracleModel {
    fn predict(&self, sample: &Sample) -> Result<RegressorOutput> {
        Ok(RegressorOutput {
            params_pred: sample.params_gt,
            embedding: sample.params_gt[IDX_SHAPE].to_vec(),
        })
    }
}

/// Returns the same output for every sample.
#[derive(Debug, Clone)]
pub struct ConstantModel(pub RegressorOutput);

impl Predictor for ConstantModel {
    fn predict(&self, _sample: &Sample) -> Result<RegressorOutput> {
        Ok(self.0.clone())
    }
}

/// Per sample: rebuild the predicted and true shapes from their coefficients,
/// align predicted onto true with known correspondences, and report NME.
pub fn reconstruction_eval(model: &dyn Predictor, samples: &[&Sample], basis: &MorphableBasis) -> Result<Vec<EvalRecord>> {
    samples
        .iter()
        .map(|s| {
            let pred = model.predict(s)?.params_pred;
            let shape_pred = reconstruct_shape(basis, &pred[IDX_SHAPE], &pred[IDX_EXPRESSION])?;
            let shape_gt = reconstruct_shape(basis, &s.params_gt[IDX_SHAPE], &s.params_gt[IDX_EXPRESSION])?;
            let aligned = rigid_align(&shape_pred, &shape_gt, AlignMode::KnownCorrespondence)?;
            Ok(EvalRecord {
                identity_id: s.identity_id,
                pose_id: s.pose_id,
                nme_percent: nme(&aligned.aligned, &shape_gt)?,
            })
        })
        .collect()
}

/// Per identity, the distances of each predicted shape block to the identity's
/// mean predicted block. Identities ascending.
pub fn shape_block_spread(model: &dyn Predictor, samples: &[&Sample]) -> Result<Vec<(u32, Vec<f64>)>> {
    let mut groups: BTreeMap<u32, Vec<Vec<f64>>> = BTreeMap::new();
    for s in samples {
        let out = model.predict(s)?;
        groups
            .entry(s.identity_id)
            .or_default()
            .push(out.params_pred[SHAPE_BLOCK].to_vec());
    }
    Ok(groups
        .into_iter()
        .map(|(id, blocks)| {
            let width = blocks[0].len();
            let mut centroid = vec![0.0; width];
            for b in &blocks {
                centroid.iter_mut().zip(b).for_each(|(c, x)| *c += x);
            }
            centroid.iter_mut().for_each(|c| *c /= blocks.len() as f64);
            let dists = blocks
                .iter()
                .map(|b| b.iter().zip(&centroid).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt())
                .collect();
            (id, dists)
        })
        .collect())
}

/// Mean over identities of the interquartile range of [`shape_block_spread`] distances.
pub fn mean_spread_iqr(model: &dyn Predictor, samples: &[&Sample]) -> Result<f64> {
    let spread = shape_block_spread(model, samples)?;
    let mut total = 0.0;
    for (_, d) in &spread {
        total += BoxStats::from_values(d)?.iqr;
    }
    Ok(total / spread.len().max(1) as f64)
}
