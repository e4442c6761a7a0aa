use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::morphable_model::Shape3D;

/// Per-sample reconstruction error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    pub identity_id: u32,
    pub pose_id: u32,
    pub nme_percent: f64,
}

/// `sqrt(Δx · Δy)` of the axis-aligned x–y bounding box.
pub fn bbox_size(shape: &Shape3D) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in shape.vertices() {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    ((x1 - x0) * (y1 - y0)).sqrt()
}

/// Mean per-vertex Euclidean distance as a percentage of the ground truth's bounding-box size.
pub fn nme(aligned: &Shape3D, gt: &Shape3D) -> Result<f64> {
    if aligned.0.len() != gt.0.len() {
        return Err(Error::dim("aligned shape length", gt.0.len(), aligned.0.len()));
    }
    if gt.0.is_empty() || gt.0.len() % 3 != 0 {
        return Err(Error::InvalidInput("shapes must hold a positive number of 3D vertices".into()));
    }
    let size = bbox_size(gt);
    if !(size > 0.0) {
        return Err(Error::Degenerate("ground-truth bounding box has zero area".into()));
    }
    let total: f64 = aligned
        .vertices()
        .zip(gt.vertices())
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
        .sum();
    Ok(100.0 * total / gt.vertex_count() as f64 / size)
}

/// Quantile of ascending-sorted data by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Five-number summary plus interquartile range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("box statistics of an empty set".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&sorted, 0.25);
        let q3 = quantile_sorted(&sorted, 0.75);
        Ok(Self {
            count: sorted.len(),
            min: sorted[0],
            q1,
            median: quantile_sorted(&sorted, 0.5),
            q3,
            max: sorted[sorted.len() - 1],
            iqr: q3 - q1,
        })
    }
}

/// Box statistics of NME per identity, identities ascending.
pub fn per_identity_boxstats(records: &[EvalRecord]) -> Result<Vec<(u32, BoxStats)>> {
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.identity_id).or_default().push(r.nme_percent);
    }
    groups
        .into_iter()
        .map(|(id, v)| Ok((id, BoxStats::from_values(&v)?)))
        .collect()
}

/// Fraction of records with NME at or below each threshold.
pub fn edc_curve(records: &[EvalRecord], thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("EDC thresholds must be ascending".into()));
    }
    if thresholds.is_empty() {
        return Ok(Vec::new());
    }
    if records.is_empty() {
        return Err(Error::InvalidInput("EDC of an empty record set".into()));
    }
    let mut values: Vec<f64> = records.iter().map(|r| r.nme_percent).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| (t, values.partition_point(|&v| v <= t) as f64 / n))
        .collect())
}

/// `steps + 1` evenly spaced thresholds from 0 to the largest NME.
pub fn default_edc_thresholds(records: &[EvalRecord], steps: usize) -> Vec<f64> {
    let max = records.iter().map(|r| r.nme_percent).fold(0.0, f64::max);
    let steps = steps.max(1);
    (0..=steps).map(|i| max * i as f64 / steps as f64).collect()
}
