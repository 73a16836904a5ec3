//! Evaluation metrics for level prediction.
//!
//! Two protocols: the Pearson correlation coefficient between predicted and
//! labeled level sequences, and the relative deviation which normalizes each
//! error by the worst deviation possible for that label. A replication-ratio
//! statistic counts predictions at or above a threshold level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("sequence has zero variance; correlation is undefined")]
    ZeroVariance,
    #[error("sequences have mismatched lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("label {0} outside [0, {1}]")]
    LabelOutOfRange(f64, usize),
    #[error("empty input")]
    Empty,
}

/// Paired prediction/label sequences over a level grid with max level `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSeries {
    pub predictions: Vec<f64>,
    pub labels: Vec<f64>,
    pub max_level: usize,
}

impl EvalSeries {
    pub fn new(
        predictions: Vec<f64>,
        labels: Vec<f64>,
        max_level: usize,
    ) -> Result<Self, MetricError> {
        if predictions.len() != labels.len() {
            return Err(MetricError::LengthMismatch(predictions.len(), labels.len()));
        }
        if let Some(&bad) = labels
            .iter()
            .find(|&&l| l < 0.0 || l > max_level as f64 || !l.is_finite())
        {
            return Err(MetricError::LabelOutOfRange(bad, max_level));
        }
        Ok(Self {
            predictions,
            labels,
            max_level,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn pcc(&self) -> Result<f64, MetricError> {
        pcc(&self.predictions, &self.labels)
    }

    pub fn rd(&self) -> Result<f64, MetricError> {
        rd(&self.predictions, &self.labels, self.max_level)
    }
}

/// Pearson correlation coefficient of two sequences.
pub fn pcc(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricError::TooFewSamples {
            needed: 2,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut s_ab = 0.0;
    let mut s_aa = 0.0;
    let mut s_bb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let u = x - mean_a;
        let v = y - mean_b;
        s_ab += u * v;
        s_aa += u * u;
        s_bb += v * v;
    }
    if s_aa == 0.0 || s_bb == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    Ok(s_ab / (s_aa.sqrt() * s_bb.sqrt()))
}

/// Relative and absolute deviation of a single prediction/label pair.
///
/// The relative deviation divides by the worst deviation reachable from the
/// label, `max(N - s_l, s_l)`; the absolute one divides by `N`.
pub fn deviations(s_p: f64, s_l: f64, max_level: usize) -> (f64, f64) {
    let n = max_level as f64;
    let diff = (s_p - s_l).abs();
    let worst = (n - s_l).max(s_l);
    (diff / worst, diff / n)
}

/// Mean relative deviation over a batch, with predictions clamped to
/// `[0, N]` first so the result stays in `[0, 1]`.
pub fn rd(predictions: &[f64], labels: &[f64], max_level: usize) -> Result<f64, MetricError> {
    if predictions.len() != labels.len() {
        return Err(MetricError::LengthMismatch(predictions.len(), labels.len()));
    }
    if predictions.is_empty() {
        return Err(MetricError::Empty);
    }
    let n = max_level as f64;
    if let Some(&bad) = labels.iter().find(|&&l| l < 0.0 || l > n) {
        return Err(MetricError::LabelOutOfRange(bad, max_level));
    }
    let sum: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(&p, &l)| deviations(p.clamp(0.0, n), l, max_level).0)
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Scale a similarity in `[0, 1]` onto the level axis.
pub fn scale_similarity(sim: f64, max_level: usize) -> f64 {
    max_level as f64 * sim
}

/// Fraction of predicted levels at or above `threshold`.
pub fn replication_ratio(levels: &[usize], threshold: usize) -> Result<f64, MetricError> {
    if levels.is_empty() {
        return Err(MetricError::Empty);
    }
    let hits = levels.iter().filter(|&&l| l >= threshold).count();
    Ok(hits as f64 / levels.len() as f64)
}

/// Evaluation summary emitted by `pdfembed eval`.
///
/// `pcc` is `None` when the correlation is undefined (constant predictions
/// or labels) rather than silently zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub pcc: Option<f64>,
    pub rd: f64,
    pub n: usize,
    /// Histogram of predicted levels 0..=N.
    pub per_level_histogram: Vec<usize>,
    /// Fraction of predictions at level >= 4 (or the configured threshold).
    pub replication_ratio: f64,
}

/// Build the eval report from integer level predictions.
pub fn eval_report(
    predicted_levels: &[usize],
    labels: &[f64],
    max_level: usize,
    replication_threshold: usize,
) -> Result<EvalReport, MetricError> {
    if predicted_levels.is_empty() {
        return Err(MetricError::Empty);
    }
    let predictions: Vec<f64> = predicted_levels.iter().map(|&j| j as f64).collect();
    let pcc_value = match pcc(&predictions, labels) {
        Ok(v) => Some(v),
        Err(MetricError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    let rd_value = rd(&predictions, labels, max_level)?;
    let mut histogram = vec![0usize; max_level + 1];
    for &j in predicted_levels {
        histogram[j.min(max_level)] += 1;
    }
    Ok(EvalReport {
        pcc: pcc_value,
        rd: rd_value,
        n: predicted_levels.len(),
        per_level_histogram: histogram,
        replication_ratio: replication_ratio(predicted_levels, replication_threshold)?,
    })
}
