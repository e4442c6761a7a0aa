//! Shared-weight two-head regressor and its two-stage Siamese trainer.

mod model;
mod train;

pub use model::{Activation, ForwardCache, InputFrame, OutputGrad, RegressorModel, RegressorOutput, DEFAULT_EMBED_DIM};
pub use train::{sample_pairs, sgd_step, train, EpochRecord, PairSampler, SiamesePair, TrainConfig, TrainOutcome};
