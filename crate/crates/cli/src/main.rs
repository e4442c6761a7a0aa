//! `siamface` command-line front end: synthesize data, train, evaluate.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "siamface",
    version,
    about = "Siamese morphable-model regression on synthetic landmarks",
    long_about = "Siamese morphable-model regression on synthetic landmarks.\n\n\
        Each option's help ends with its provenance: [paper] for values taken from the \
        reference method, [artifact] for choices made by this implementation. Every \
        command writes `<output>.manifest.json` next to its primary output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic morphable basis and a labelled landmark dataset.
    Synth(SynthArgs),
    /// Two-stage training: parameter loss first, then parameter + contrastive losses.
    Train(TrainArgs),
    /// Reconstruction error tables: per-sample NME, per-identity box statistics, EDC.
    EvalRecon(EvalReconArgs),
    /// k-fold pair verification: per-fold accuracy and pooled ROC.
    EvalVerify(EvalVerifyArgs),
}

#[derive(Args, Serialize, Debug)]
pub struct SynthArgs {
    /// Number of identities, at least 2 [artifact]
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
    pub identities: u64,
    /// Poses per identity, at least 2 [artifact]
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub poses: u64,
    /// Landmark noise standard deviation [artifact]
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Dataset seed [artifact]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Basis seed; defaults to --seed [artifact]
    #[arg(long)]
    pub basis_seed: Option<u64>,
    /// Vertices in the synthetic mesh [artifact]
    #[arg(long, default_value_t = 200)]
    pub vertices: usize,
    /// Sparse landmarks per face [paper]
    #[arg(long, default_value_t = 68)]
    pub landmarks: usize,
    /// Fraction of identities held out for validation [artifact]
    #[arg(long, default_value_t = 0.2)]
    pub validation_fraction: f64,
    /// Seed of the identity split [artifact]
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Basis output file
    #[arg(long)]
    pub basis_out: PathBuf,
    /// Dataset output file
    #[arg(long)]
    pub data_out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameArg {
    Raw,
    Landmark,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationArg {
    Tanh,
    Relu,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Validation,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Euclidean,
    Normalized,
    Cosine,
}

#[derive(Args, Serialize, Debug)]
pub struct TrainArgs {
    /// Dataset file written by `synth`
    #[arg(long)]
    pub data: PathBuf,
    /// Basis file written by `synth`
    #[arg(long)]
    pub basis: PathBuf,
    /// Stage-1 epochs (parameter loss only) [artifact]
    #[arg(long, default_value_t = 40)]
    pub stage1_epochs: usize,
    /// Stage-2 epochs (full loss) [artifact]
    #[arg(long, default_value_t = 40)]
    pub stage2_epochs: usize,
    /// Pairs per SGD step [paper]
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    /// SGD steps per epoch; defaults to ceil(training samples / batch) [artifact]
    #[arg(long)]
    pub batches_per_epoch: Option<usize>,
    /// Contrastive margin [artifact]
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    /// Initial weight of the parameter loss [paper]
    #[arg(long, default_value_t = 1e-2)]
    pub w3d: f64,
    /// Initial weight of the shape contrastive loss [paper]
    #[arg(long, default_value_t = 1e-3)]
    pub wshp: f64,
    /// Initial weight of the embedding contrastive loss [paper]
    #[arg(long, default_value_t = 1e-4)]
    pub wid: f64,
    /// Per-epoch decay of the loss weights, restarting each stage [artifact]
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Probability that a sampled training pair is genuine [artifact]
    #[arg(long, default_value_t = 0.5)]
    pub genuine_prob: f64,
    /// L2-normalize embeddings inside the contrastive loss [artifact]
    #[arg(long)]
    pub normalize_embeddings: bool,
    /// Halve the impostor term of the contrastive loss [artifact]
    #[arg(long)]
    pub symmetric_impostor: bool,
    /// Comma-separated hidden layer widths [artifact]
    #[arg(long, value_delimiter = ',', default_value = "128,128")]
    pub hidden: Vec<usize>,
    /// Embedding width [artifact]
    #[arg(long, default_value_t = 64)]
    pub embed_dim: usize,
    /// Hidden activation [artifact]
    #[arg(long, value_enum, default_value_t = ActivationArg::Tanh)]
    pub activation: ActivationArg,
    /// Input features: raw landmarks or centroid/radius-normalized landmarks [artifact]
    #[arg(long, value_enum, default_value_t = FrameArg::Landmark)]
    pub input_frame: FrameArg,
    /// Regress raw parameters instead of standardized ones [artifact]
    #[arg(long)]
    pub raw_outputs: bool,
    /// Seed for weight initialization and pair sampling [artifact]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model output file
    #[arg(long)]
    pub model_out: PathBuf,
    /// Per-epoch loss trace table
    #[arg(long)]
    pub trace_out: PathBuf,
}

#[derive(Args, Serialize, Debug)]
pub struct EvalReconArgs {
    /// Model file written by `train`
    #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
    pub model: Option<PathBuf>,
    /// Predict the ground-truth parameters instead of loading a model
    #[arg(long)]
    pub oracle: bool,
    /// Dataset file
    #[arg(long)]
    pub data: PathBuf,
    /// Basis file
    #[arg(long)]
    pub basis: PathBuf,
    /// Identities to evaluate [artifact]
    #[arg(long, value_enum, default_value_t = SplitArg::Validation)]
    pub split: SplitArg,
    /// EDC threshold steps between 0 and the largest NME [artifact]
    #[arg(long, default_value_t = 100)]
    pub edc_steps: usize,
    /// Output prefix; writes <prefix>_records.csv, _boxstats.csv, _edc.csv, _spread.csv
    #[arg(long)]
    pub out_prefix: String,
}

#[derive(Args, Serialize, Debug)]
pub struct EvalVerifyArgs {
    /// Model file written by `train`
    #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
    pub model: Option<PathBuf>,
    /// Use ground-truth identity coefficients as embeddings
    #[arg(long)]
    pub oracle: bool,
    /// Dataset file
    #[arg(long)]
    pub data: PathBuf,
    /// Identities to evaluate [artifact]
    #[arg(long, value_enum, default_value_t = SplitArg::Validation)]
    pub split: SplitArg,
    /// Total verification pairs [paper]
    #[arg(long, default_value_t = 6000)]
    pub pairs: usize,
    /// Genuine pairs among them [paper]
    #[arg(long, default_value_t = 3000)]
    pub genuine: usize,
    /// Cross-validation folds [paper]
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Embedding distance [artifact]
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    /// Seed for pair selection and fold assignment [artifact]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes <prefix>_roc.csv and <prefix>_folds.csv
    #[arg(long)]
    pub out: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Train(a) => commands::train(&a),
        Command::EvalRecon(a) => commands::eval_recon(&a),
        Command::EvalVerify(a) => commands::eval_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
