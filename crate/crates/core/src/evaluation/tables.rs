//! Comma-separated result tables. Every table has a header row; reals carry 9
//! significant digits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::textio::fmt_table;

use crate::regressor::EpochRecord;

use super::{BoxStats, EvalRecord, RocResult};

pub const RECORDS_HEADER: &str = "identity_id,pose_id,nme_percent";
pub const BOXSTATS_HEADER: &str = "identity_id,count,min,q1,median,q3,max,iqr";
pub const EDC_HEADER: &str = "threshold,fraction";
pub const ROC_HEADER: &str = "fpr,tpr";
pub const FOLDS_HEADER: &str = "fold,threshold,accuracy";
pub const TRACE_HEADER: &str = "stage,epoch,l3d,lshp,lid,total,w_3d,w_shp,w_id";

pub fn records_table(records: &[EvalRecord]) -> String {
    let mut out = format!("{RECORDS_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{},{}", r.identity_id, r.pose_id, fmt_table(r.nme_percent));
    }
    out
}

pub fn boxstats_table(stats: &[(u32, BoxStats)]) -> String {
    let mut out = format!("{BOXSTATS_HEADER}\n");
    for (id, b) in stats {
        let _ = writeln!(
            out,
            "{id},{},{},{},{},{},{},{}",
            b.count,
            fmt_table(b.min),
            fmt_table(b.q1),
            fmt_table(b.median),
            fmt_table(b.q3),
            fmt_table(b.max),
            fmt_table(b.iqr)
        );
    }
    out
}

pub fn edc_table(curve: &[(f64, f64)]) -> String {
    let mut out = format!("{EDC_HEADER}\n");
    for (t, f) in curve {
        let _ = writeln!(out, "{},{}", fmt_table(*t), fmt_table(*f));
    }
    out
}

pub fn roc_table(result: &RocResult) -> String {
    let mut out = format!("{ROC_HEADER}\n");
    for (fpr, tpr) in &result.roc_points {
        let _ = writeln!(out, "{},{}", fmt_table(*fpr), fmt_table(*tpr));
    }
    out
}

pub fn folds_table(result: &RocResult) -> String {
    let mut out = format!("{FOLDS_HEADER}\n");
    for (k, (t, a)) in result.fold_thresholds.iter().zip(&result.fold_accuracies).enumerate() {
        let _ = writeln!(out, "{},{},{}", k + 1, fmt_table(*t), fmt_table(*a));
    }
    out
}

/// Per-epoch loss trace, one row per epoch in training order.
pub fn trace_table(trace: &[EpochRecord]) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in trace {
        let _ = write!(out, "{},{}", r.stage, r.epoch);
        for v in [r.l3d, r.lshp, r.lid, r.total, r.w_3d, r.w_shp, r.w_id] {
            let _ = write!(out, ",{}", fmt_table(v));
        }
        out.push('\n');
    }
    out
}

/// A parsed table: header names and rows of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Parses a table written by this module, requiring the given header.
pub fn parse_table(text: &str, expected_header: &str) -> Result<Table> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "header", "empty table"))?;
    if header.trim() != expected_header {
        return Err(Error::parse(1, "header", format!("expected `{expected_header}`, found `{header}`")));
    }
    let header: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(c, tok)| {
                let name = header.get(c).map(String::as_str).unwrap_or("?");
                crate::textio::parse_real(i + 1, name, tok.trim())
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::parse(i + 1, "row", format!("expected {} columns, found {}", header.len(), row.len())));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip_through_parser() {
        let recs = vec![
            EvalRecord {
                identity_id: 3,
                pose_id: 1,
                nme_percent: 1.0 / 3.0,
            },
            EvalRecord {
                identity_id: 4,
                pose_id: 0,
                nme_percent: 12.5,
            },
        ];
        let text = records_table(&recs);
        assert!(text.contains("3.33333333e-1"));
        let t = parse_table(&text, RECORDS_HEADER).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.column("nme_percent").unwrap()[1], 12.5);
        assert!(parse_table(&text, EDC_HEADER).is_err());
    }
}
