//! Synthetic identity/pose datasets and their line-oriented file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::morphable_model::{
    rotation_from_euler, sparse_landmarks, FlatParams, MorphableBasis, ParamVector, N_EXP, N_PARAMS, N_SHAPE,
};
use crate::textio;

/// Standard deviation of every identity coefficient.
pub const SHAPE_COEF_STD: f64 = 1.0;
/// Standard deviation of every expression coefficient.
pub const EXPRESSION_COEF_STD: f64 = 0.3;
pub const MAX_YAW_DEG: f64 = 90.0;
pub const MAX_PITCH_DEG: f64 = 25.0;
pub const MAX_ROLL_DEG: f64 = 25.0;
pub const SCALE_RANGE: (f64, f64) = (0.8, 1.2);
pub const MAX_TRANSLATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
}

impl Split {
    pub fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            _ => None,
        }
    }
}

/// One synthetic observation with its ground-truth parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub identity_id: u32,
    pub pose_id: u32,
    pub params_gt: FlatParams,
    /// Noisy projected landmarks, interleaved `(x, y)`.
    pub observation: Vec<f64>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Fingerprint of the basis the samples were generated from.
    pub basis_id: String,
    pub landmark_count: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn identities(&self) -> BTreeSet<u32> {
        self.samples.iter().map(|s| s.identity_id).collect()
    }

    pub fn samples_in(&self, split: Split) -> Vec<&Sample> {
        self.samples.iter().filter(|s| s.split == split).collect()
    }

    /// Sample indices grouped by identity, identities ascending.
    pub fn by_identity(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut map: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            map.entry(s.identity_id).or_default().push(i);
        }
        map
    }

    /// Checks the record invariants: nonempty, consistent lengths, one split per identity.
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidInput("dataset has no samples".into()));
        }
        let obs_len = 2 * self.landmark_count;
        let mut split_of: BTreeMap<u32, Split> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            if s.observation.len() != obs_len {
                return Err(Error::dim(format!("observation of sample {i}"), obs_len, s.observation.len()));
            }
            if let Some(prev) = split_of.insert(s.identity_id, s.split) {
                if prev != s.split {
                    return Err(Error::InvalidInput(format!(
                        "identity {} appears in both train and validation splits",
                        s.identity_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# siamface dataset\n");
        let _ = writeln!(
            out,
            "dataset basis={} landmarks={} samples={} identities={}",
            self.basis_id,
            self.landmark_count,
            self.samples.len(),
            self.identities().len()
        );
        for s in &self.samples {
            let _ = writeln!(
                out,
                "identity={} pose={} split={} params={} observation={}",
                s.identity_id,
                s.pose_id,
                s.split.tag(),
                join_csv(&s.params_gt),
                join_csv(&s.observation)
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut records = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (header_line, header) = records
            .next()
            .ok_or_else(|| Error::parse(1, "dataset", "empty dataset file"))?;
        let fields = parse_fields(header_line, header, "dataset")?;
        let basis_id = field(&fields, header_line, "basis")?.to_string();
        let landmark_count = textio::parse_usize(header_line, "landmarks", field(&fields, header_line, "landmarks")?)?;
        let declared = textio::parse_usize(header_line, "samples", field(&fields, header_line, "samples")?)?;

        let mut samples = Vec::with_capacity(declared);
        for (n, line) in records {
            let fields = parse_fields(n, line, "identity")?;
            let identity_id = parse_u32(n, "identity", field(&fields, n, "identity")?)?;
            let pose_id = parse_u32(n, "pose", field(&fields, n, "pose")?)?;
            let split_tag = field(&fields, n, "split")?;
            let split = Split::from_tag(split_tag)
                .ok_or_else(|| Error::parse(n, "split", format!("unknown split `{split_tag}`")))?;
            let params = parse_csv(n, "params", field(&fields, n, "params")?)?;
            if params.len() != N_PARAMS {
                return Err(Error::dim(format!("params of record at line {n}"), N_PARAMS, params.len()));
            }
            let observation = parse_csv(n, "observation", field(&fields, n, "observation")?)?;
            if observation.len() != 2 * landmark_count {
                return Err(Error::dim(
                    format!("observation of record at line {n}"),
                    2 * landmark_count,
                    observation.len(),
                ));
            }
            samples.push(Sample {
                identity_id,
                pose_id,
                params_gt: params.try_into().expect("length checked"),
                observation,
                split,
            });
        }
        if samples.is_empty() {
            return Err(Error::parse(header_line, "samples", "dataset has no records"));
        }
        if samples.len() != declared {
            return Err(Error::parse(
                header_line,
                "samples",
                format!("header declares {declared} records, found {}", samples.len()),
            ));
        }
        let dataset = Dataset {
            basis_id,
            landmark_count,
            samples,
        };
        dataset.validate()?;
        Ok(dataset)
    }
}

fn join_csv(values: &[f64]) -> String {
    values.iter().map(|v| textio::fmt_exact(*v)).collect::<Vec<_>>().join(",")
}

fn parse_csv(line: usize, name: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| textio::parse_real(line, name, t)).collect()
}

fn parse_u32(line: usize, name: &str, text: &str) -> Result<u32> {
    text.parse()
        .map_err(|_| Error::parse(line, name, format!("`{text}` is not an unsigned integer")))
}

fn parse_fields<'a>(line: usize, text: &'a str, leading: &str) -> Result<BTreeMap<&'a str, &'a str>> {
    let mut tokens = text.split_whitespace();
    let mut fields = BTreeMap::new();
    if leading == "dataset" {
        if tokens.next() != Some("dataset") {
            return Err(Error::parse(line, "dataset", "missing `dataset` header line"));
        }
    }
    for token in tokens {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| Error::parse(line, token, "expected `key=value`"))?;
        fields.insert(k, v);
    }
    Ok(fields)
}

fn field<'a>(fields: &BTreeMap<&'a str, &'a str>, line: usize, name: &str) -> Result<&'a str> {
    fields
        .get(name)
        .copied()
        .ok_or_else(|| Error::parse(line, name, "missing field"))
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dataset.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_text(&text)
}

fn identity_rng(seed: u64, identity: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(identity) + 1);
    rng
}

/// `n_identities × poses_per_identity` samples. Each identity keeps one shape
/// vector; every sample draws its own expression, rotation, scale and
/// translation, and its observation is the projected landmarks plus Gaussian
/// noise. All samples start in the training split.
pub fn generate_dataset(
    basis: &MorphableBasis,
    n_identities: usize,
    poses_per_identity: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_identities < 2 || poses_per_identity < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 identities and 2 poses per identity, got {n_identities} and {poses_per_identity}"
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sigma must be nonnegative, got {noise_sigma}")));
    }
    if basis.landmark_count() == 0 {
        return Err(Error::InvalidInput("basis has no landmark indices".into()));
    }
    let mut samples = Vec::with_capacity(n_identities * poses_per_identity);
    for identity in 0..n_identities as u32 {
        let mut rng = identity_rng(seed, identity);
        let mut u_shp = [0.0; N_SHAPE];
        for u in &mut u_shp {
            *u = SHAPE_COEF_STD * rng.sample::<f64, _>(StandardNormal);
        }
        for pose in 0..poses_per_identity as u32 {
            let mut u_exp = [0.0; N_EXP];
            for u in &mut u_exp {
                *u = EXPRESSION_COEF_STD * rng.sample::<f64, _>(StandardNormal);
            }
            let yaw = rng.random_range(-MAX_YAW_DEG..=MAX_YAW_DEG).to_radians();
            let pitch = rng.random_range(-MAX_PITCH_DEG..=MAX_PITCH_DEG).to_radians();
            let roll = rng.random_range(-MAX_ROLL_DEG..=MAX_ROLL_DEG).to_radians();
            let params = ParamVector {
                f: rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1),
                r: rotation_from_euler(yaw, pitch, roll),
                t2d: [
                    rng.random_range(-MAX_TRANSLATION..=MAX_TRANSLATION),
                    rng.random_range(-MAX_TRANSLATION..=MAX_TRANSLATION),
                ],
                u_shp,
                u_exp,
            };
            let mut observation = sparse_landmarks(&params, basis)?.0;
            if noise_sigma > 0.0 {
                for o in &mut observation {
                    *o += noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            samples.push(Sample {
                identity_id: identity,
                pose_id: pose,
                params_gt: params.pack(),
                observation,
                split: Split::Train,
            });
        }
    }
    Ok(Dataset {
        basis_id: basis.fingerprint(),
        landmark_count: basis.landmark_count(),
        samples,
    })
}

/// Tags `round(fraction · K)` randomly chosen identities as validation and the rest as training.
pub fn split_by_identity(dataset: &Dataset, validation_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&validation_fraction) {
        return Err(Error::InvalidInput(format!(
            "validation fraction must lie in [0, 1], got {validation_fraction}"
        )));
    }
    let mut ids: Vec<u32> = dataset.identities().into_iter().collect();
    let n_val = (validation_fraction * ids.len() as f64).round() as usize;
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let validation: BTreeSet<u32> = ids[..n_val].iter().copied().collect();
    let mut out = dataset.clone();
    for s in &mut out.samples {
        s.split = if validation.contains(&s.identity_id) {
            Split::Validation
        } else {
            Split::Train
        };
    }
    Ok(out)
}
