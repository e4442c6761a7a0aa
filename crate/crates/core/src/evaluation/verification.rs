//! Pair verification with k-fold threshold selection and a pooled ROC sweep.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::PairLabel;
use crate::regressor::{PairSampler, SiamesePair};
use crate::synth_data::Sample;

use super::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMetric {
    /// Euclidean distance on raw embeddings.
    Euclidean,
    /// Euclidean distance after L2 normalization.
    NormalizedEuclidean,
    /// `1 − cos(e1, e2)`.
    Cosine,
}

impl VerifyMetric {
    pub fn tag(self) -> &'static str {
        match self {
            VerifyMetric::Euclidean => "euclidean",
            VerifyMetric::NormalizedEuclidean => "normalized",
            VerifyMetric::Cosine => "cosine",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "euclidean" => Some(VerifyMetric::Euclidean),
            "normalized" => Some(VerifyMetric::NormalizedEuclidean),
            "cosine" => Some(VerifyMetric::Cosine),
            _ => None,
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        match self {
            VerifyMetric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            VerifyMetric::NormalizedEuclidean => {
                let (na, nb) = (norm(a).max(1e-12), norm(b).max(1e-12));
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x / na - y / nb).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            VerifyMetric::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                1.0 - dot / (norm(a) * norm(b)).max(1e-12)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub n_pairs: usize,
    pub n_genuine: usize,
    pub folds: usize,
    pub seed: u64,
    pub metric: VerifyMetric,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_pairs: 6000,
            n_genuine: 3000,
            folds: 10,
            seed: 0,
            metric: VerifyMetric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocResult {
    pub fold_accuracies: Vec<f64>,
    /// Threshold chosen on the other folds and applied to each held-out fold.
    pub fold_thresholds: Vec<f64>,
    pub mean_accuracy: f64,
    /// `(false-positive rate, true-positive rate)`, sorted by FPR.
    pub roc_points: Vec<(f64, f64)>,
}

fn accuracy_at(distances: &[f64], labels: &[PairLabel], threshold: f64) -> f64 {
    let correct = distances
        .iter()
        .zip(labels)
        .filter(|(d, l)| (**d <= threshold) == (**l == PairLabel::Genuine))
        .count();
    correct as f64 / distances.len() as f64
}

/// Accuracy-maximizing threshold (genuine iff `d ≤ threshold`). Candidates are
/// the midpoints between consecutive distinct distances plus one value below
/// the minimum and one above the maximum; ties go to the smallest candidate.
pub fn best_threshold(distances: &[f64], labels: &[PairLabel]) -> f64 {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let n_impostor = labels.iter().filter(|l| **l == PairLabel::Impostor).count();
    // Threshold below everything: all impostors are correct.
    let mut correct = n_impostor as i64;
    let mut best = (correct, distances[order[0]] - 1.0);
    let mut i = 0;
    while i < order.len() {
        let d = distances[order[i]];
        while i < order.len() && distances[order[i]] == d {
            correct += if labels[order[i]] == PairLabel::Genuine { 1 } else { -1 };
            i += 1;
        }
        let candidate = if i < order.len() {
            0.5 * (d + distances[order[i]])
        } else {
            d + 1.0
        };
        if correct > best.0 {
            best = (correct, candidate);
        }
    }
    best.1
}

/// ROC points over every distinct distance threshold, from (0, 0) to (1, 1).
pub fn roc_curve(distances: &[f64], labels: &[PairLabel]) -> Result<Vec<(f64, f64)>> {
    let n_gen = labels.iter().filter(|l| **l == PairLabel::Genuine).count();
    let n_imp = labels.len() - n_gen;
    if n_gen == 0 || n_imp == 0 {
        return Err(Error::InvalidInput("ROC needs both genuine and impostor pairs".into()));
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let d = distances[order[i]];
        while i < order.len() && distances[order[i]] == d {
            match labels[order[i]] {
                PairLabel::Genuine => tp += 1,
                PairLabel::Impostor => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / n_imp as f64, tp as f64 / n_gen as f64));
    }
    Ok(points)
}

/// k-fold accuracy from precomputed pair distances. Pairs are shuffled with
/// `seed` and dealt round-robin into `folds` folds.
pub fn kfold_verification(distances: &[f64], labels: &[PairLabel], folds: usize, seed: u64) -> Result<RocResult> {
    if distances.len() != labels.len() {
        return Err(Error::dim("pair labels", distances.len(), labels.len()));
    }
    if folds < 2 {
        return Err(Error::InvalidInput("need at least 2 folds".into()));
    }
    if distances.len() < folds {
        return Err(Error::InvalidInput(format!(
            "{} pairs cannot fill {folds} folds",
            distances.len()
        )));
    }
    if distances.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("pair distances must be finite".into()));
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0usize; distances.len()];
    for (pos, &idx) in order.iter().enumerate() {
        fold_of[idx] = pos % folds;
    }
    let mut fold_accuracies = Vec::with_capacity(folds);
    let mut fold_thresholds = Vec::with_capacity(folds);
    for k in 0..folds {
        let (mut train_d, mut train_l, mut test_d, mut test_l) = (vec![], vec![], vec![], vec![]);
        for i in 0..distances.len() {
            if fold_of[i] == k {
                test_d.push(distances[i]);
                test_l.push(labels[i]);
            } else {
                train_d.push(distances[i]);
                train_l.push(labels[i]);
            }
        }
        let threshold = best_threshold(&train_d, &train_l);
        fold_accuracies.push(accuracy_at(&test_d, &test_l, threshold));
        fold_thresholds.push(threshold);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
    Ok(RocResult {
        fold_accuracies,
        fold_thresholds,
        mean_accuracy,
        roc_points: roc_curve(distances, labels)?,
    })
}

fn draw_distinct(
    count: usize,
    available: usize,
    draw: impl Fn(&mut ChaCha8Rng) -> SiamesePair,
    enumerate: impl Fn() -> Vec<SiamesePair>,
    rng: &mut ChaCha8Rng,
    kind: &str,
) -> Result<Vec<SiamesePair>> {
    if count > available {
        return Err(Error::InsufficientData(format!(
            "requested {count} distinct {kind} pairs but only {available} exist"
        )));
    }
    if 2 * count > available {
        let mut all = enumerate();
        all.shuffle(rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = draw(rng);
        let key = (p.first.min(p.second), p.first.max(p.second));
        if seen.insert(key) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Exactly `n_genuine` genuine and `n_pairs − n_genuine` impostor pairs, all
/// distinct as unordered sample pairs.
pub fn select_verification_pairs(samples: &[&Sample], n_pairs: usize, n_genuine: usize, seed: u64) -> Result<Vec<SiamesePair>> {
    if n_genuine > n_pairs {
        return Err(Error::InvalidInput(format!(
            "genuine count {n_genuine} exceeds pair count {n_pairs}"
        )));
    }
    let n_impostor = n_pairs - n_genuine;
    let sampler = PairSampler::new(samples);
    if n_genuine > 0 {
        sampler.check(1.0)?;
    }
    if n_impostor > 0 {
        sampler.check(0.0)?;
    }
    let mut groups: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for (i, s) in samples.iter().enumerate() {
        groups.entry(s.identity_id).or_default().push(i);
    }
    let genuine_available: usize = groups.values().map(|g| g.len() * (g.len() - 1) / 2).sum();
    let all_available = samples.len() * samples.len().saturating_sub(1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pairs = draw_distinct(
        n_genuine,
        genuine_available,
        |r| sampler.genuine(r),
        || {
            let mut v = vec![];
            for g in groups.values() {
                for a in 0..g.len() {
                    for b in a + 1..g.len() {
                        v.push(SiamesePair {
                            first: g[a],
                            second: g[b],
                            label: PairLabel::Genuine,
                        });
                    }
                }
            }
            v
        },
        &mut rng,
        "genuine",
    )?;
    pairs.extend(draw_distinct(
        n_impostor,
        all_available - genuine_available,
        |r| sampler.impostor(r),
        || {
            let mut v = vec![];
            for a in 0..samples.len() {
                for b in a + 1..samples.len() {
                    if samples[a].identity_id != samples[b].identity_id {
                        v.push(SiamesePair {
                            first: a,
                            second: b,
                            label: PairLabel::Impostor,
                        });
                    }
                }
            }
            v
        },
        &mut rng,
        "impostor",
    )?);
    Ok(pairs)
}

/// Embedding-distance verification over `samples` with k-fold threshold selection.
pub fn verification_eval(model: &dyn Predictor, samples: &[&Sample], cfg: &VerifyConfig) -> Result<RocResult> {
    if cfg.n_pairs < cfg.folds {
        return Err(Error::InvalidInput(format!(
            "{} pairs cannot fill {} folds",
            cfg.n_pairs, cfg.folds
        )));
    }
    let pairs = select_verification_pairs(samples, cfg.n_pairs, cfg.n_genuine, cfg.seed)?;
    let embeddings = samples
        .iter()
        .map(|s| Ok(model.predict(s)?.embedding))
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = pairs
        .iter()
        .map(|p| cfg.metric.distance(&embeddings[p.first], &embeddings[p.second]))
        .collect();
    let labels: Vec<PairLabel> = pairs.iter().map(|p| p.label).collect();
    // fold assignment uses a stream independent of pair selection
    let mut fold_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    fold_rng.set_stream(1);
    kfold_verification(&distances, &labels, cfg.folds, fold_rng.random())
}
