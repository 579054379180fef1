use serde::{Deserialize, Serialize};

use super::{MetricsError, Ranked, ScoredLabels};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Cases with `score <= threshold` are predicted anomalous.
pub fn confusion(sl: &ScoredLabels, threshold: f64) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for (&s, &a) in sl.scores().iter().zip(sl.labels()) {
        match (s <= threshold, a) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    cm
}

/// Threshold metric panel. A metric whose denominator is zero is `None`
/// (serialized as `null`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub mcc: Option<f64>,
    pub kappa: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn threshold_metrics(cm: &ConfusionMatrix) -> ThresholdMetrics {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let n = tp + fp + fn_ + tn;
    let mcc_den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let kappa = if n == 0.0 {
        None
    } else {
        let p_o = (tp + tn) / n;
        let p_e = ((tp + fp) * (tp + fn_) + (fn_ + tn) * (fp + tn)) / (n * n);
        ratio(p_o - p_e, 1.0 - p_e)
    };
    ThresholdMetrics {
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        precision: ratio(tp, tp + fp),
        accuracy: ratio(tp + tn, n),
        f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
        mcc: ratio(tp * tn - fp * fn_, mcc_den),
        kappa,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Sensitivity + specificity - 1.
    Youden,
    Mcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestThreshold {
    pub criterion: Criterion,
    pub threshold: f64,
    pub value: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: ThresholdMetrics,
}

/// Sweeps every distinct score as a threshold and keeps the best value of
/// `criterion`; on ties the smaller threshold wins. Undefined MCC values are
/// skipped.
pub fn best_threshold(
    sl: &ScoredLabels,
    criterion: Criterion,
) -> Result<BestThreshold, MetricsError> {
    sl.require_both()?;
    let ranked = Ranked::new(sl);
    let counts = ranked.counts(sl.labels());
    let (p, n) = (sl.positives() as u64, sl.negatives() as u64);
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut best: Option<(f64, f64, ConfusionMatrix)> = None;
    for (t, c) in ranked.thresholds.iter().zip(&counts) {
        tp += c.anomalies;
        fp += c.normals;
        let cm = ConfusionMatrix {
            tp,
            fp,
            fn_: p - tp,
            tn: n - fp,
        };
        let m = threshold_metrics(&cm);
        let value = match criterion {
            Criterion::Youden => m.sensitivity.zip(m.specificity).map(|(a, b)| a + b - 1.0),
            Criterion::Mcc => m.mcc,
        };
        if let Some(v) = value {
            if best.map_or(true, |(bv, _, _)| v > bv) {
                best = Some((v, *t, cm));
            }
        }
    }
    // Youden is always defined with both classes present; MCC is undefined
    // only when every case is predicted the same way, which the sweep's
    // first threshold avoids unless a single score is shared by all cases.
    let (value, threshold, cm) = best.unwrap_or_else(|| {
        let t = ranked.thresholds[0];
        (0.0, t, confusion(sl, t))
    });
    Ok(BestThreshold {
        criterion,
        threshold,
        value,
        confusion: cm,
        metrics: threshold_metrics(&cm),
    })
}
