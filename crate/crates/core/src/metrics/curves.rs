use serde::{Deserialize, Serialize};

use super::{GroupCount, MetricsError, Ranked, ScoredLabels};

/// PR curves are integrated step-wise: precision is held constant between
/// achievable recall levels (no linear interpolation).
pub const PR_INTERPOLATION: &str = "step";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Score threshold reaching this point; `None` for the origin.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub(crate) fn from_counts(thresholds: &[f64], counts: &[GroupCount]) -> Self {
        let (p, n) = totals(counts);
        let (p, n) = (p as f64, n as f64);
        let mut points = Vec::with_capacity(counts.len() + 1);
        points.push(RocPoint {
            fpr: 0.0,
            tpr: 0.0,
            threshold: None,
        });
        let (mut tp, mut fp) = (0u64, 0u64);
        for (t, c) in thresholds.iter().zip(counts) {
            if c.anomalies == 0 && c.normals == 0 {
                continue;
            }
            tp += c.anomalies;
            fp += c.normals;
            points.push(RocPoint {
                fpr: fp as f64 / n,
                tpr: tp as f64 / p,
                threshold: Some(*t),
            });
        }
        Self { points }
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    }

    /// TPR at `fpr` by linear interpolation. Where the curve has a vertical
    /// segment at exactly `fpr`, the lowest point of that segment is used.
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        let j = self.points.partition_point(|pt| pt.fpr < fpr);
        if j == 0 {
            return self.points[0].tpr;
        }
        if j == self.points.len() {
            return self.points[j - 1].tpr;
        }
        let (a, b) = (self.points[j - 1], self.points[j]);
        if b.fpr == fpr {
            return b.tpr;
        }
        a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr)
    }
}

fn totals(counts: &[GroupCount]) -> (u64, u64) {
    counts
        .iter()
        .fold((0, 0), |(p, n), c| (p + c.anomalies, n + c.normals))
}

/// Trapezoidal ROC AUC from grouped counts, evaluated in integer arithmetic:
/// each group adds `normals * (2 * tp_before + anomalies)` half-pairs.
pub(crate) fn auc_from_counts(counts: &[GroupCount]) -> f64 {
    let (p, n) = totals(counts);
    let mut tp_before: u128 = 0;
    let mut half_pairs: u128 = 0;
    for c in counts {
        half_pairs += u128::from(c.normals) * (2 * tp_before + u128::from(c.anomalies));
        tp_before += u128::from(c.anomalies);
    }
    half_pairs as f64 / (2.0 * p as f64 * n as f64)
}

/// ROC curve over all distinct thresholds and its trapezoidal AUC. Tied
/// scores form a single diagonal step.
pub fn roc_auc(sl: &ScoredLabels) -> Result<(RocCurve, f64), MetricsError> {
    sl.require_both()?;
    let ranked = Ranked::new(sl);
    let counts = ranked.counts(sl.labels());
    Ok((
        RocCurve::from_counts(&ranked.thresholds, &counts),
        auc_from_counts(&counts),
    ))
}

/// Restriction of the ROC plane for a partial AUC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "focus", rename_all = "lowercase")]
pub enum PartialRange {
    /// Specificity between `lo` and `hi`, i.e. FPR in `[1 - hi, 1 - lo]`.
    Specificity { lo: f64, hi: f64 },
    /// Sensitivity (TPR) between `lo` and `hi`.
    Sensitivity { lo: f64, hi: f64 },
}

impl PartialRange {
    fn bounds(self) -> (f64, f64) {
        match self {
            PartialRange::Specificity { lo, hi } | PartialRange::Sensitivity { lo, hi } => (lo, hi),
        }
    }

    pub fn validate(self) -> Result<(), MetricsError> {
        let (lo, hi) = self.bounds();
        if (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo < hi {
            Ok(())
        } else {
            Err(MetricsError::BadRange { lo, hi })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialAucSpec {
    pub range: PartialRange,
    pub standardized: bool,
}

// Area under a piecewise-linear function given by points with non-decreasing
// x, restricted to [a, b]. Vertical segments contribute nothing.
fn integrate(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x1 <= x0 || x1 <= a || x0 >= b {
            continue;
        }
        let at = |x: f64| y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        let (l, r) = (x0.max(a), x1.min(b));
        let (yl, yr) = (
            if l == x0 { y0 } else { at(l) },
            if r == x1 { y1 } else { at(r) },
        );
        area += (r - l) * (yl + yr) / 2.0;
    }
    area
}

/// Partial area over a specificity or sensitivity band, optionally
/// standardized so that the chance diagonal scores 0.5 and a perfect curve 1.
pub fn partial_auc(
    curve: &RocCurve,
    range: PartialRange,
    standardized: bool,
) -> Result<f64, MetricsError> {
    range.validate()?;
    let (raw, min, max) = match range {
        PartialRange::Specificity { lo, hi } => {
            let (a, b) = (1.0 - hi, 1.0 - lo);
            let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.fpr, p.tpr)).collect();
            (integrate(&pts, a, b), (b * b - a * a) / 2.0, b - a)
        }
        PartialRange::Sensitivity { lo, hi } => {
            let (a, b) = (lo, hi);
            let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.tpr, 1.0 - p.fpr)).collect();
            (
                integrate(&pts, a, b),
                (b - a) - (b * b - a * a) / 2.0,
                b - a,
            )
        }
    };
    if standardized {
        Ok(0.5 * (1.0 + (raw - min) / (max - min)))
    } else {
        Ok(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    points: Vec<PrPoint>,
    pub interpolation: &'static str,
}

impl PrCurve {
    pub(crate) fn from_counts(thresholds: &[f64], counts: &[GroupCount]) -> Self {
        let (p, _) = totals(counts);
        let mut points = vec![PrPoint {
            recall: 0.0,
            precision: 1.0,
            threshold: None,
        }];
        let (mut tp, mut fp) = (0u64, 0u64);
        for (t, c) in thresholds.iter().zip(counts) {
            if c.anomalies == 0 && c.normals == 0 {
                continue;
            }
            tp += c.anomalies;
            fp += c.normals;
            points.push(PrPoint {
                recall: tp as f64 / p as f64,
                precision: tp as f64 / (tp + fp) as f64,
                threshold: Some(*t),
            });
        }
        Self {
            points,
            interpolation: PR_INTERPOLATION,
        }
    }

    pub fn points(&self) -> &[PrPoint] {
        &self.points
    }
}

/// Step-wise area: each recall increment is weighted by the precision
/// reached at that threshold.
pub(crate) fn pr_auc_from_counts(counts: &[GroupCount]) -> f64 {
    let (p, _) = totals(counts);
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut area = 0.0;
    for c in counts {
        tp += c.anomalies;
        fp += c.normals;
        if c.anomalies > 0 {
            area += (c.anomalies as f64 / p as f64) * (tp as f64 / (tp + fp) as f64);
        }
    }
    area
}

pub fn pr_auc(sl: &ScoredLabels) -> Result<(PrCurve, f64), MetricsError> {
    sl.require_both()?;
    let ranked = Ranked::new(sl);
    let counts = ranked.counts(sl.labels());
    Ok((
        PrCurve::from_counts(&ranked.thresholds, &counts),
        pr_auc_from_counts(&counts),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sl(anom: &[f64], norm: &[f64]) -> ScoredLabels {
        ScoredLabels::from_classes(anom, norm).unwrap()
    }

    /// Concordant pairs plus half the ties, over all (anomaly, normal) pairs.
    fn pair_count_auc(s: &ScoredLabels) -> f64 {
        let mut num = 0.0;
        let mut pairs = 0.0;
        for (i, &a) in s.scores().iter().enumerate() {
            if !s.labels()[i] {
                continue;
            }
            for (j, &n) in s.scores().iter().enumerate() {
                if s.labels()[j] {
                    continue;
                }
                pairs += 1.0;
                if a < n {
                    num += 1.0;
                } else if a == n {
                    num += 0.5;
                }
            }
        }
        num / pairs
    }

    /// Riemann midpoint sum of TPR over an FPR band, 1e6 cells.
    fn riemann_tpr(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
        let cells = 1_000_000;
        let h = (b - a) / cells as f64;
        let f = |x: f64| {
            for w in points.windows(2) {
                if w[0].0 <= x && x <= w[1].0 && w[1].0 > w[0].0 {
                    return w[0].1 + (w[1].1 - w[0].1) * (x - w[0].0) / (w[1].0 - w[0].0);
                }
            }
            unreachable!()
        };
        (0..cells).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn roc_examples() {
        assert_eq!(roc_auc(&sl(&[1.0, 2.0], &[8.0, 9.0])).unwrap().1, 1.0);
        assert_eq!(roc_auc(&sl(&[3.0, 3.0], &[3.0, 3.0])).unwrap().1, 0.5);
        let s = sl(&[1.0, 3.0], &[2.0, 4.0]);
        assert_eq!(pair_count_auc(&s), 0.75);
        assert_eq!(roc_auc(&s).unwrap().1, 0.75);
    }

    #[test]
    fn roc_curve_shape() {
        let (c, _) = roc_auc(&sl(&[1.0, 3.0], &[2.0, 4.0])).unwrap();
        let pts: Vec<(f64, f64)> = c.points().iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(
            pts,
            vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(c.area(), 0.75);
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(
            roc_auc(&sl(&[1.0], &[])).unwrap_err(),
            MetricsError::SingleClass
        );
        assert_eq!(
            pr_auc(&sl(&[], &[1.0])).unwrap_err(),
            MetricsError::SingleClass
        );
    }

    #[test]
    fn partial_examples() {
        let spec = PartialRange::Specificity { lo: 0.9, hi: 1.0 };
        let (perfect, _) = roc_auc(&sl(&[1.0, 2.0], &[8.0, 9.0])).unwrap();
        assert_eq!(partial_auc(&perfect, spec, true).unwrap(), 1.0);
        let (chance, _) = roc_auc(&sl(&[1.0], &[1.0])).unwrap();
        assert!((partial_auc(&chance, spec, true).unwrap() - 0.5).abs() < 1e-15);
        let sens = PartialRange::Sensitivity { lo: 0.9, hi: 1.0 };
        assert_eq!(partial_auc(&perfect, sens, true).unwrap(), 1.0);
        assert!((partial_auc(&chance, sens, true).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_against_riemann_oracle() {
        let pts = [(0.0, 0.0), (0.05, 0.8), (0.1, 0.9), (1.0, 1.0)];
        let curve = RocCurve {
            points: pts
                .iter()
                .map(|&(fpr, tpr)| RocPoint {
                    fpr,
                    tpr,
                    threshold: None,
                })
                .collect(),
        };
        let raw = riemann_tpr(&pts, 0.0, 0.1);
        let (min, max) = (0.1f64 * 0.1 / 2.0, 0.1);
        let oracle = 0.5 * (1.0 + (raw - min) / (max - min));
        let got =
            partial_auc(&curve, PartialRange::Specificity { lo: 0.9, hi: 1.0 }, true).unwrap();
        // 0.5 * (1 + (0.0625 - 0.005) / 0.095)
        assert!((got - 0.802_631_578_947_368_4).abs() < 1e-12);
        assert!((got - oracle).abs() <= 1e-6);

        // Clipping in the middle of a segment: FPR band [0.02, 0.07].
        let got_raw = partial_auc(
            &curve,
            PartialRange::Specificity { lo: 0.93, hi: 0.98 },
            false,
        )
        .unwrap();
        assert!((got_raw - riemann_tpr(&pts, 0.02, 0.07)).abs() <= 1e-6);
    }

    #[test]
    fn degenerate_range_rejected() {
        let (c, _) = roc_auc(&sl(&[1.0], &[2.0])).unwrap();
        assert!(partial_auc(&c, PartialRange::Specificity { lo: 0.9, hi: 0.9 }, true).is_err());
        assert!(partial_auc(&c, PartialRange::Sensitivity { lo: -0.1, hi: 0.5 }, true).is_err());
    }

    /// Enumerates thresholds directly on the raw scores.
    fn pr_oracle(s: &ScoredLabels) -> f64 {
        let mut ts: Vec<f64> = s.scores().to_vec();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let p = s.positives() as f64;
        let mut prev_recall = 0.0;
        let mut area = 0.0;
        for t in ts {
            let (mut tp, mut fp) = (0.0, 0.0);
            for (x, &a) in s.scores().iter().zip(s.labels()) {
                if *x <= t {
                    if a {
                        tp += 1.0;
                    } else {
                        fp += 1.0;
                    }
                }
            }
            let recall = tp / p;
            area += (recall - prev_recall) * (tp / (tp + fp));
            prev_recall = recall;
        }
        area
    }

    #[test]
    fn pr_examples() {
        assert_eq!(pr_auc(&sl(&[1.0, 2.0], &[8.0, 9.0])).unwrap().1, 1.0);
        let (_, flat) = pr_auc(&sl(&[5.0], &[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(flat, 0.25);
        // anomalies at 1 and 4, normals at 2 and 3:
        // recall 1/2 at precision 1, then recall 1 at precision 2/4.
        let s = sl(&[1.0, 4.0], &[2.0, 3.0]);
        assert_eq!(pr_oracle(&s), 0.75);
        let (curve, auc) = pr_auc(&s).unwrap();
        assert_eq!(auc, 0.75);
        assert_eq!(curve.interpolation, "step");
        assert_eq!(curve.points().len(), 5);
    }

    proptest! {
        #[test]
        fn roc_matches_pair_counting(
            data in prop::collection::vec((0u32..30, any::<bool>()), 2..500)
        ) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0)).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            let s = ScoredLabels::new(scores, labels).unwrap();
            prop_assume!(s.positives() > 0 && s.negatives() > 0);
            let (curve, auc) = roc_auc(&s).unwrap();
            prop_assert!((auc - pair_count_auc(&s)).abs() <= 1e-12);
            prop_assert!((curve.area() - auc).abs() <= 1e-12);
            let full = partial_auc(&curve, PartialRange::Specificity { lo: 0.0, hi: 1.0 }, false).unwrap();
            prop_assert!((full - auc).abs() <= 1e-12);
            prop_assert!((pr_auc(&s).unwrap().1 - pr_oracle(&s)).abs() <= 1e-12);

            let shifted = ScoredLabels::new(
                s.scores().iter().map(|x| 2.0 * x + 1.0).collect(),
                s.labels().to_vec(),
            ).unwrap();
            prop_assert_eq!(roc_auc(&shifted).unwrap().1, auc);
        }
    }
}
