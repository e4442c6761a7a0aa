use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use siamface::evaluation::tables::{boxstats_table, edc_table, folds_table, records_table, roc_table, trace_table};
use siamface::evaluation::{
    default_edc_thresholds, edc_curve, mean_spread_iqr, per_identity_boxstats, reconstruction_eval,
    shape_block_spread, verification_eval, BoxStats, OracleModel, Predictor, VerifyConfig, VerifyMetric,
};
use siamface::losses::LossConfig;
use siamface::morphable_model::{make_synthetic_basis, MorphableBasis};
use siamface::regressor::{self, Activation, InputFrame, RegressorModel, TrainConfig};
use siamface::synth_data::{generate_dataset, read_dataset, split_by_identity, Dataset, Sample, Split};

use crate::manifest::{show, write_file, RunManifest, VERSION_TAG};
use crate::{
    ActivationArg, EvalReconArgs, EvalVerifyArgs, FrameArg, MetricArg, SplitArg, SynthArgs, TrainArgs,
};

fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(path).with_context(|| format!("reading dataset {}", path.display()))
}

fn load_basis(path: &Path, dataset: &Dataset) -> Result<MorphableBasis> {
    let basis = MorphableBasis::load(path).with_context(|| format!("reading basis {}", path.display()))?;
    if basis.fingerprint() != dataset.basis_id {
        bail!(
            "basis {} (fingerprint {}) does not match the dataset's basis {}",
            path.display(),
            basis.fingerprint(),
            dataset.basis_id
        );
    }
    Ok(basis)
}

fn select(dataset: &Dataset, split: SplitArg) -> Vec<&Sample> {
    match split {
        SplitArg::Train => dataset.samples_in(Split::Train),
        SplitArg::Validation => dataset.samples_in(Split::Validation),
        SplitArg::All => dataset.samples.iter().collect(),
    }
}

fn load_predictor(model: &Option<PathBuf>, oracle: bool) -> Result<Box<dyn Predictor>> {
    match (model, oracle) {
        (_, true) => Ok(Box::new(OracleModel)),
        (Some(path), false) => Ok(Box::new(
            RegressorModel::load(path).with_context(|| format!("reading model {}", path.display()))?,
        )),
        (None, false) => bail!("either --model or --oracle is required"),
    }
}

fn suffixed(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let basis_seed = a.basis_seed.unwrap_or(a.seed);
    let basis = make_synthetic_basis(a.vertices, a.landmarks, basis_seed)?;
    let dataset = generate_dataset(&basis, a.identities as usize, a.poses as usize, a.noise, a.seed)?;
    let dataset = split_by_identity(&dataset, a.validation_fraction, a.split_seed)?;
    write_file(&a.basis_out, &basis.to_text())?;
    write_file(&a.data_out, &dataset.to_text())?;
    RunManifest {
        command: "synth",
        version: VERSION_TAG,
        seed: a.seed,
        config: a,
        inputs: BTreeMap::new(),
        outputs: BTreeMap::from([("basis", show(&a.basis_out)), ("data", show(&a.data_out))]),
    }
    .write_beside(&a.data_out)?;
    println!(
        "samples {} identities {} train {} validation {}",
        dataset.samples.len(),
        dataset.identities().len(),
        dataset.samples_in(Split::Train).len(),
        dataset.samples_in(Split::Validation).len()
    );
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let dataset = load_dataset(&a.data)?;
    let basis = load_basis(&a.basis, &dataset)?;
    let frame = match a.input_frame {
        FrameArg::Raw => InputFrame::Raw,
        FrameArg::Landmark => InputFrame::Landmark,
    };
    let activation = match a.activation {
        ActivationArg::Tanh => Activation::Tanh,
        ActivationArg::Relu => Activation::Relu,
    };
    let mut sizes = vec![frame.feature_len(2 * dataset.landmark_count)];
    sizes.extend(&a.hidden);
    let mut model = RegressorModel::new(&sizes, a.embed_dim, activation, a.seed)?;
    model.set_frame(frame)?;
    let cfg = TrainConfig {
        batch_size: a.batch,
        stage1_epochs: a.stage1_epochs,
        stage2_epochs: a.stage2_epochs,
        batches_per_epoch: a.batches_per_epoch,
        loss: LossConfig {
            margin: a.margin,
            w_3d: a.w3d,
            w_shp: a.wshp,
            w_id: a.wid,
            gamma: a.gamma,
            symmetric_impostor: a.symmetric_impostor,
            normalize_embeddings: a.normalize_embeddings,
        },
        seed: a.seed,
        genuine_prob: a.genuine_prob,
        standardize_inputs: true,
        standardize_outputs: !a.raw_outputs,
    };
    let outcome = regressor::train(model, &dataset, &basis, &cfg)?;
    write_file(&a.trace_out, &trace_table(&outcome.trace))?;
    write_file(&a.model_out, &outcome.model.to_text())?;
    RunManifest {
        command: "train",
        version: VERSION_TAG,
        seed: a.seed,
        config: a,
        inputs: BTreeMap::from([("data", show(&a.data)), ("basis", show(&a.basis))]),
        outputs: BTreeMap::from([("model", show(&a.model_out)), ("trace", show(&a.trace_out))]),
    }
    .write_beside(&a.model_out)?;
    if let Some(last) = outcome.trace.last() {
        println!(
            "epochs {} final stage {} l3d {:.6e} lshp {:.6e} lid {:.6e}",
            outcome.trace.len(),
            last.stage,
            last.l3d,
            last.lshp,
            last.lid
        );
    }
    Ok(())
}

pub fn eval_recon(a: &EvalReconArgs) -> Result<()> {
    let dataset = load_dataset(&a.data)?;
    let basis = load_basis(&a.basis, &dataset)?;
    let predictor = load_predictor(&a.model, a.oracle)?;
    let samples = select(&dataset, a.split);
    if samples.is_empty() {
        bail!("the selected split has no samples");
    }
    let records = reconstruction_eval(predictor.as_ref(), &samples, &basis)?;
    let boxstats = per_identity_boxstats(&records)?;
    let edc = edc_curve(&records, &default_edc_thresholds(&records, a.edc_steps))?;
    let spread = shape_block_spread(predictor.as_ref(), &samples)?
        .into_iter()
        .map(|(id, d)| Ok((id, BoxStats::from_values(&d)?)))
        .collect::<siamface::Result<Vec<_>>>()?;

    let paths = [
        ("records", suffixed(&a.out_prefix, "_records.csv")),
        ("boxstats", suffixed(&a.out_prefix, "_boxstats.csv")),
        ("edc", suffixed(&a.out_prefix, "_edc.csv")),
        ("spread", suffixed(&a.out_prefix, "_spread.csv")),
    ];
    write_file(&paths[0].1, &records_table(&records))?;
    write_file(&paths[1].1, &boxstats_table(&boxstats))?;
    write_file(&paths[2].1, &edc_table(&edc))?;
    write_file(&paths[3].1, &boxstats_table(&spread))?;
    let mut inputs = BTreeMap::from([("data", show(&a.data)), ("basis", show(&a.basis))]);
    if let Some(m) = &a.model {
        inputs.insert("model", show(m));
    }
    RunManifest {
        command: "eval-recon",
        version: VERSION_TAG,
        seed: 0,
        config: a,
        inputs,
        outputs: paths.iter().map(|(k, p)| (*k, show(p))).collect(),
    }
    .write_beside(&paths[0].1)?;

    let mean_nme = records.iter().map(|r| r.nme_percent).sum::<f64>() / records.len() as f64;
    let mean_iqr = boxstats.iter().map(|(_, b)| b.iqr).sum::<f64>() / boxstats.len() as f64;
    println!(
        "samples {} mean_nme {:.6} mean_nme_iqr {:.6} mean_spread_iqr {:.6}",
        records.len(),
        mean_nme,
        mean_iqr,
        mean_spread_iqr(predictor.as_ref(), &samples)?
    );
    Ok(())
}

pub fn eval_verify(a: &EvalVerifyArgs) -> Result<()> {
    let dataset = load_dataset(&a.data)?;
    let predictor = load_predictor(&a.model, a.oracle)?;
    let samples = select(&dataset, a.split);
    let cfg = VerifyConfig {
        n_pairs: a.pairs,
        n_genuine: a.genuine,
        folds: a.folds,
        seed: a.seed,
        metric: match a.metric {
            MetricArg::Euclidean => VerifyMetric::Euclidean,
            MetricArg::Normalized => VerifyMetric::NormalizedEuclidean,
            MetricArg::Cosine => VerifyMetric::Cosine,
        },
    };
    let result = verification_eval(predictor.as_ref(), &samples, &cfg)?;
    let roc = suffixed(&a.out, "_roc.csv");
    let folds = suffixed(&a.out, "_folds.csv");
    write_file(&roc, &roc_table(&result))?;
    write_file(&folds, &folds_table(&result))?;
    let mut inputs = BTreeMap::from([("data", show(&a.data))]);
    if let Some(m) = &a.model {
        inputs.insert("model", show(m));
    }
    RunManifest {
        command: "eval-verify",
        version: VERSION_TAG,
        seed: a.seed,
        config: a,
        inputs,
        outputs: BTreeMap::from([("roc", show(&roc)), ("folds", show(&folds))]),
    }
    .write_beside(&roc)?;
    println!("pairs {} folds {} mean_accuracy {:.6}", a.pairs, a.folds, result.mean_accuracy);
    Ok(())
}
