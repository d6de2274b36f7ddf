//! Precision / recall / F1 of detected users against a blacklist, and
//! sweeps over the vote threshold.

use std::io::Write;

use serde::Serialize;

use crate::ensemble::VoteTally;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    pub detected_count: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalReport {
            threshold: None,
            detected_count: tp + fp,
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Scores user-side detections. `is_fraud[u]` marks blacklisted users; the
/// universe is `0..is_fraud.len()`.
pub fn evaluate(detected: &[u32], is_fraud: &[bool]) -> EvalReport {
    let mut seen = vec![false; is_fraud.len()];
    let (mut tp, mut fp) = (0, 0);
    for &u in detected {
        let u = u as usize;
        if std::mem::replace(&mut seen[u], true) {
            continue;
        }
        if is_fraud[u] {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    let positives = is_fraud.iter().filter(|&&f| f).count();
    EvalReport::from_counts(tp, fp, positives - tp)
}

/// Indicator vector over `0..n_users` for a list of fraud ids.
pub fn truth_mask(n_users: usize, fraud_users: &[u32]) -> Vec<bool> {
    let mut mask = vec![false; n_users];
    for &u in fraud_users {
        mask[u as usize] = true;
    }
    mask
}

/// One report per threshold `T = 1..=N`, ordered by `T`.
pub fn sweep_threshold(tally: &VoteTally, is_fraud: &[bool]) -> Vec<EvalReport> {
    let n = tally.num_samples;
    // cumulative counts from the top: users with at least T votes
    let mut fraud_at = vec![0usize; n + 2];
    let mut clean_at = vec![0usize; n + 2];
    for (u, &v) in tally.user_votes.iter().enumerate() {
        let v = v as usize;
        if is_fraud[u] {
            fraud_at[v] += 1;
        } else {
            clean_at[v] += 1;
        }
    }
    for t in (0..=n).rev() {
        fraud_at[t] += fraud_at[t + 1];
        clean_at[t] += clean_at[t + 1];
    }
    let positives = is_fraud.iter().filter(|&&f| f).count();
    (1..=n)
        .map(|t| EvalReport {
            threshold: Some(t),
            ..EvalReport::from_counts(fraud_at[t], clean_at[t], positives - fraud_at[t])
        })
        .collect()
}

/// Row with the highest F1 (lowest threshold on ties).
pub fn best_f1(rows: &[EvalReport]) -> Option<&EvalReport> {
    rows.iter().fold(None, |best: Option<&EvalReport>, r| match best {
        Some(b) if b.f1 >= r.f1 => Some(b),
        _ => Some(r),
    })
}

pub const SWEEP_HEADER: &str = "T,detected,tp,fp,fn,precision,recall,f1";

pub fn write_sweep_csv<W: Write>(rows: &[EvalReport], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.threshold.unwrap_or(0),
            r.detected_count,
            r.tp,
            r.fp,
            r.fn_,
            r.precision,
            r.recall,
            r.f1
        )?;
    }
    out.flush()?;
    Ok(())
}
