//! Timing of detector variants on nested subsets of one dataset.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::Dataset;
use crate::detector::{detect, DetectError, DetectionConfig};
use crate::metrics::{roc_auc, ScoredLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Final,
    Pruneless,
    Stepless,
    Unweighted,
}

impl Variant {
    pub fn config(self) -> DetectionConfig {
        match self {
            Variant::Final => DetectionConfig::default(),
            Variant::Pruneless => DetectionConfig::pruneless(),
            Variant::Stepless => DetectionConfig::stepless(),
            Variant::Unweighted => DetectionConfig::unweighted(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Final => "final",
            Variant::Pruneless => "pruneless",
            Variant::Stepless => "stepless",
            Variant::Unweighted => "unweighted",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "final" => Ok(Variant::Final),
            "pruneless" => Ok(Variant::Pruneless),
            "stepless" => Ok(Variant::Stepless),
            "unweighted" => Ok(Variant::Unweighted),
            other => Err(format!(
                "unknown variant `{other}` (expected final, pruneless, stepless or unweighted)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub variant: Variant,
    /// Subset index, 1 for the smallest and `fractions` for the full set.
    pub fraction: usize,
    pub n: usize,
    pub repeat: usize,
    pub seconds: f64,
    pub iterations: u32,
    /// ROC AUC against the labels, when labels with both classes exist.
    pub auc: Option<f64>,
}

/// Least-squares line `seconds = intercept + slope * n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn new(points: &[(f64, f64)]) -> Self {
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let ss_res: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
        Self {
            slope,
            intercept,
            r_squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn fit(&self, variant: Variant) -> LinearFit {
        let points: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| (r.n as f64, r.seconds))
            .collect();
        LinearFit::new(&points)
    }

    /// Mean time of `variant` on subset `fraction`.
    pub fn mean_seconds(&self, variant: Variant, fraction: usize) -> f64 {
        let times: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.variant == variant && r.fraction == fraction)
            .map(|r| r.seconds)
            .collect();
        times.iter().sum::<f64>() / times.len() as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "variant",
            "fraction",
            "n",
            "repeat",
            "seconds",
            "iterations",
            "auc",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.variant.to_string(),
                r.fraction.to_string(),
                r.n.to_string(),
                r.repeat.to_string(),
                r.seconds.to_string(),
                r.iterations.to_string(),
                r.auc.map_or_else(String::new, |a| a.to_string()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nested subsets: one seeded permutation of the cases, cut at
/// `n * k / fractions` for `k = 1..=fractions`. Ids within a subset keep
/// their original order.
pub fn nested_subsets(n: usize, fractions: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    (1..=fractions)
        .map(|k| {
            let mut ids = order[..n * k / fractions].to_vec();
            ids.sort_unstable();
            ids
        })
        .collect()
}

/// Runs every variant on every subset, `repeats` times. Variants are
/// interleaved within each subset so that slow drift in machine load hits
/// them alike.
pub fn run_bench(
    data: &Dataset,
    labels: Option<&[bool]>,
    variants: &[Variant],
    fractions: usize,
    repeats: usize,
    subset_seed: u64,
) -> Result<BenchReport, DetectError> {
    let subsets = nested_subsets(data.len(), fractions, subset_seed);
    let mut rows = Vec::new();
    for repeat in 1..=repeats {
        for (k, ids) in subsets.iter().enumerate() {
            let part = data.subset(ids);
            let truth: Option<Vec<bool>> = labels.map(|l| ids.iter().map(|&g| l[g]).collect());
            for &variant in variants {
                let config = variant.config();
                let start = Instant::now();
                let result = detect(&part, &config)?;
                let seconds = start.elapsed().as_secs_f64();
                let auc = truth.as_ref().and_then(|t| {
                    let sl = ScoredLabels::new(result.scores.clone(), t.clone()).ok()?;
                    roc_auc(&sl).ok().map(|(_, a)| a)
                });
                rows.push(BenchRow {
                    variant,
                    fraction: k + 1,
                    n: ids.len(),
                    repeat,
                    seconds,
                    iterations: result.iterations_run,
                    auc,
                });
            }
        }
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_line_has_unit_r_squared() {
        let fit = LinearFit::new(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        assert_eq!(fit.slope, 2.0);
        assert_eq!(fit.intercept, 1.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn r_squared_matches_correlation() {
        let pts = [(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 5.0)];
        // sxy^2 / (sxx * syy) = 5.5^2 / (5 * 8.75)
        let fit = LinearFit::new(&pts);
        assert!((fit.r_squared - 121.0 / 175.0).abs() < 1e-12);
    }

    #[test]
    fn subsets_are_nested() {
        let subsets = nested_subsets(103, 5, 7);
        let sizes: Vec<usize> = subsets.iter().map(Vec::len).collect();
        assert_eq!(sizes, [20, 41, 61, 82, 103]);
        for w in subsets.windows(2) {
            assert!(w[0].iter().all(|g| w[1].binary_search(g).is_ok()));
        }
    }

    #[test]
    fn variant_names_parse() {
        for v in [
            Variant::Final,
            Variant::Pruneless,
            Variant::Stepless,
            Variant::Unweighted,
        ] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("fastest".parse::<Variant>().is_err());
    }
}
