//! Evaluation of gradual anomaly scores against binary labels.
//!
//! Orientation is fixed throughout: a LOW score means anomalous. Curves are
//! swept from the lowest score upwards, so "predicted anomaly at threshold
//! `t`" always means `score <= t`.

mod bootstrap;
mod curves;
mod threshold;

use serde::Serialize;
use thiserror::Error;

pub use bootstrap::{
    bootstrap_ci, bootstrap_many, pauc_diff_test, roc_band, BandPoint, BootstrapCI, Statistic,
    StratifiedSampler, MIN_RESAMPLES,
};
pub use curves::{
    partial_auc, pr_auc, roc_auc, PartialAucSpec, PartialRange, PrCurve, PrPoint, RocCurve,
    RocPoint, PR_INTERPOLATION,
};
pub use threshold::{
    best_threshold, confusion, threshold_metrics, BestThreshold, ConfusionMatrix, Criterion,
    ThresholdMetrics,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("score at position {0} is not finite")]
    NonFinite(usize),
    #[error("both anomalies and normal cases are required")]
    SingleClass,
    #[error("partial AUC range [{lo}, {hi}] is empty or outside [0, 1]")]
    BadRange { lo: f64, hi: f64 },
    #[error("at least 100 bootstrap resamples are required, got {0}")]
    TooFewResamples(usize),
    #[error("confidence level must lie in (0, 1)")]
    BadLevel,
    #[error("fpr grid is empty")]
    EmptyGrid,
    #[error("paired test needs the same labeled cases on both sides")]
    Unpaired,
}

/// Scores with their ground truth, one entry per case.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLabels {
    scores: Vec<f64>,
    anomaly: Vec<bool>,
}

impl ScoredLabels {
    pub fn new(scores: Vec<f64>, anomaly: Vec<bool>) -> Result<Self, MetricsError> {
        if scores.len() != anomaly.len() {
            return Err(MetricsError::LengthMismatch {
                scores: scores.len(),
                labels: anomaly.len(),
            });
        }
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(MetricsError::NonFinite(pos));
        }
        Ok(Self { scores, anomaly })
    }

    /// Convenience constructor from separate anomaly and normal score lists.
    pub fn from_classes(anomalies: &[f64], normals: &[f64]) -> Result<Self, MetricsError> {
        let scores = anomalies.iter().chain(normals).copied().collect();
        let anomaly = std::iter::repeat(true)
            .take(anomalies.len())
            .chain(std::iter::repeat(false).take(normals.len()))
            .collect();
        Self::new(scores, anomaly)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.anomaly
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.anomaly.iter().filter(|&&a| a).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub(crate) fn require_both(&self) -> Result<(), MetricsError> {
        if self.positives() == 0 || self.negatives() == 0 {
            Err(MetricsError::SingleClass)
        } else {
            Ok(())
        }
    }
}

/// Cases grouped by distinct score, ascending. Every statistic is a function
/// of the per-group class counts, which lets bootstrap resamples reuse one
/// sort.
#[derive(Debug, Clone)]
pub(crate) struct Ranked {
    pub(crate) thresholds: Vec<f64>,
    pub(crate) group_of: Vec<usize>,
}

/// Class counts for one distinct score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub(crate) struct GroupCount {
    pub(crate) anomalies: u64,
    pub(crate) normals: u64,
}

impl Ranked {
    pub(crate) fn new(sl: &ScoredLabels) -> Self {
        let mut order: Vec<usize> = (0..sl.len()).collect();
        order.sort_by(|&a, &b| sl.scores[a].total_cmp(&sl.scores[b]));
        let mut thresholds = Vec::new();
        let mut group_of = vec![0; sl.len()];
        for &g in &order {
            let s = sl.scores[g];
            if thresholds.last() != Some(&s) {
                thresholds.push(s);
            }
            group_of[g] = thresholds.len() - 1;
        }
        Self {
            thresholds,
            group_of,
        }
    }

    pub(crate) fn counts(&self, labels: &[bool]) -> Vec<GroupCount> {
        let mut counts = vec![GroupCount::default(); self.thresholds.len()];
        for (g, &a) in labels.iter().enumerate() {
            let c = &mut counts[self.group_of[g]];
            if a {
                c.anomalies += 1;
            } else {
                c.normals += 1;
            }
        }
        counts
    }
}
