use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::{auc_from_counts, partial_auc, pr_auc_from_counts, PartialRange, RocCurve};
use super::{GroupCount, MetricsError, Ranked, ScoredLabels};

/// Smallest accepted number of bootstrap resamples.
pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub resamples: usize,
}

/// Statistic recomputed on every resample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "statistic", rename_all = "snake_case")]
pub enum Statistic {
    RocAuc,
    PrAuc,
    /// Partial ROC AUC over `range`, optionally McClish-standardized.
    PartialAuc {
        range: PartialRange,
        standardized: bool,
    },
}

impl Statistic {
    fn eval(&self, thresholds: &[f64], counts: &[GroupCount]) -> f64 {
        match *self {
            Statistic::RocAuc => auc_from_counts(counts),
            Statistic::PrAuc => pr_auc_from_counts(counts),
            Statistic::PartialAuc {
                range,
                standardized,
            } => {
                let curve = RocCurve::from_counts(thresholds, counts);
                partial_auc(&curve, range, standardized).expect("range validated up front")
            }
        }
    }

    fn validate(&self) -> Result<(), MetricsError> {
        match self {
            Statistic::PartialAuc { range, .. } => range.validate(),
            _ => Ok(()),
        }
    }
}

/// Draws case multiplicities for stratified resamples: anomalies and normal
/// cases are each resampled with replacement to their original counts.
///
/// Resample `r` uses its own ChaCha stream keyed by `(seed, r)`, so the
/// draw is the same however resamples are distributed over threads.
#[derive(Debug, Clone)]
pub struct StratifiedSampler {
    positives: Vec<u32>,
    negatives: Vec<u32>,
    len: usize,
    seed: u64,
}

impl StratifiedSampler {
    pub fn new(labels: &[bool], seed: u64) -> Self {
        let (mut positives, mut negatives) = (Vec::new(), Vec::new());
        for (k, &a) in labels.iter().enumerate() {
            if a {
                positives.push(k as u32);
            } else {
                negatives.push(k as u32);
            }
        }
        Self {
            positives,
            negatives,
            len: labels.len(),
            seed,
        }
    }

    /// How often each case appears in resample `r`.
    pub fn multiplicities(&self, r: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r);
        let mut mult = vec![0u32; self.len];
        for class in [&self.positives, &self.negatives] {
            let m = class.len() as u32;
            for _ in 0..m {
                mult[class[rng.random_range(0..m) as usize] as usize] += 1;
            }
        }
        mult
    }
}

fn weighted_counts(ranked: &Ranked, labels: &[bool], mult: &[u32]) -> Vec<GroupCount> {
    let mut counts = vec![GroupCount::default(); ranked.thresholds.len()];
    for (k, (&a, &w)) in labels.iter().zip(mult).enumerate() {
        if w == 0 {
            continue;
        }
        let c = &mut counts[ranked.group_of[k]];
        if a {
            c.anomalies += u64::from(w);
        } else {
            c.normals += u64::from(w);
        }
    }
    counts
}

/// Linear-interpolation sample quantile (the "type 7" rule) of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (
        quantile_sorted(&stats, tail),
        quantile_sorted(&stats, 1.0 - tail),
    )
}

fn check(sl: &ScoredLabels, resamples: usize, level: f64) -> Result<(), MetricsError> {
    sl.require_both()?;
    if resamples < MIN_RESAMPLES {
        return Err(MetricsError::TooFewResamples(resamples));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::BadLevel);
    }
    Ok(())
}

/// Percentile bootstrap intervals for several statistics over one shared
/// set of stratified resamples.
pub fn bootstrap_many(
    sl: &ScoredLabels,
    statistics: &[Statistic],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<BootstrapCI>, MetricsError> {
    check(sl, resamples, level)?;
    for s in statistics {
        s.validate()?;
    }
    let ranked = Ranked::new(sl);
    let base = ranked.counts(sl.labels());
    let sampler = StratifiedSampler::new(sl.labels(), seed);
    let per_resample: Vec<Vec<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let counts = weighted_counts(&ranked, sl.labels(), &sampler.multiplicities(r));
            statistics
                .iter()
                .map(|s| s.eval(&ranked.thresholds, &counts))
                .collect()
        })
        .collect();
    Ok(statistics
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let (lo, hi) = percentile_interval(per_resample.iter().map(|v| v[j]).collect(), level);
            BootstrapCI {
                point: s.eval(&ranked.thresholds, &base),
                lo,
                hi,
                level,
                resamples,
            }
        })
        .collect())
}

pub fn bootstrap_ci(
    sl: &ScoredLabels,
    statistic: Statistic,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCI, MetricsError> {
    Ok(bootstrap_many(sl, &[statistic], resamples, level, seed)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    pub fpr: f64,
    /// TPR of the full-sample curve.
    pub tpr: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Vertical-averaging confidence band: every bootstrap ROC curve is read off
/// at the fixed `fpr_grid` and a percentile interval is taken per point.
pub fn roc_band(
    sl: &ScoredLabels,
    resamples: usize,
    fpr_grid: &[f64],
    level: f64,
    seed: u64,
) -> Result<Vec<BandPoint>, MetricsError> {
    check(sl, resamples, level)?;
    if fpr_grid.is_empty() {
        return Err(MetricsError::EmptyGrid);
    }
    let ranked = Ranked::new(sl);
    let base = RocCurve::from_counts(&ranked.thresholds, &ranked.counts(sl.labels()));
    let sampler = StratifiedSampler::new(sl.labels(), seed);
    let curves: Vec<Vec<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let counts = weighted_counts(&ranked, sl.labels(), &sampler.multiplicities(r));
            let curve = RocCurve::from_counts(&ranked.thresholds, &counts);
            fpr_grid.iter().map(|&f| curve.tpr_at(f)).collect()
        })
        .collect();
    Ok(fpr_grid
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            let (lo, hi) = percentile_interval(curves.iter().map(|c| c[j]).collect(), level);
            BandPoint {
                fpr: f,
                tpr: base.tpr_at(f),
                lo,
                hi,
            }
        })
        .collect())
}

/// Two-sided paired bootstrap test of `stdpAUC(a) - stdpAUC(b)` over
/// `range`. Both score sets must belong to the same labeled cases; each
/// resample reuses one draw of case multiplicities for both.
///
/// Returns `2 * min(P(d <= 0), P(d >= 0))` clamped to `[2 / resamples, 1]`.
/// Identical inputs give every difference exactly 0, hence p = 1.
pub fn pauc_diff_test(
    a: &ScoredLabels,
    b: &ScoredLabels,
    range: PartialRange,
    resamples: usize,
    seed: u64,
) -> Result<f64, MetricsError> {
    if a.labels() != b.labels() {
        return Err(MetricsError::Unpaired);
    }
    check(a, resamples, 0.5)?;
    range.validate()?;
    let stat = Statistic::PartialAuc {
        range,
        standardized: true,
    };
    let (ra, rb) = (Ranked::new(a), Ranked::new(b));
    let sampler = StratifiedSampler::new(a.labels(), seed);
    let (le, ge) = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mult = sampler.multiplicities(r);
            let da = stat.eval(&ra.thresholds, &weighted_counts(&ra, a.labels(), &mult));
            let db = stat.eval(&rb.thresholds, &weighted_counts(&rb, b.labels(), &mult));
            let d = da - db;
            (usize::from(d <= 0.0), usize::from(d >= 0.0))
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let r = resamples as f64;
    let p = 2.0 * le.min(ge) as f64 / r;
    Ok(p.clamp(2.0 / r, 1.0))
}
