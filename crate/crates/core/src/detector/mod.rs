//! The iterative detector.
//!
//! Each iteration discretizes the working set at arity `b`, counts how many
//! cases share each constellation, folds those frequencies into the average
//! anomaly score (`aas`), advances the schedule, prunes the most normal cases
//! once past the fine-step phase, and checks whether enough cases have a
//! score at or below the stop point. Lower scores are more anomalous; a score
//! reads as the average number of cases similar to the case.

mod constellation;
mod prune;
mod schedule;
mod scoring;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::discretizer::{discretize, RangePolicy};

pub use constellation::{
    constellation_frequencies, encode_constellation, ConstellationKey, ConstellationTable,
};
pub use prune::{
    check_convergence, prune, upper_quantile, Convergence, PruneOutcome, MIN_RETAINED,
};
pub use schedule::{schedule_step, StopPoint, FINE_STEP_ITERATIONS};
pub use scoring::{exponential_weight, update_scores, Weighting};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("dataset has no cases")]
    EmptyDataset,
    #[error("dataset has no attributes")]
    NoAttributes,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence within {max_iterations} iterations")]
    NonConvergence {
        max_iterations: u32,
        trace: Vec<IterationRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Convergence share of the original dataset that must score `<= s`.
    pub anomaly_fraction: f64,
    /// Cases at or above this quantile of the working scores are frozen.
    pub prune_quantile: f64,
    /// Pruning applies from this iteration on.
    pub prune_start_iteration: u32,
    pub pruning_enabled: bool,
    /// Grow `b` by `s - 2` after the fine-step phase instead of by one.
    pub accelerated_stepping: bool,
    pub weighted_scores: bool,
    pub range_policy: RangePolicy,
    pub max_iterations: u32,
    pub initial_b: u32,
    pub initial_s: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            anomaly_fraction: 0.003,
            prune_quantile: 0.95,
            prune_start_iteration: 11,
            pruning_enabled: true,
            accelerated_stepping: true,
            weighted_scores: true,
            range_policy: RangePolicy::WorkingSet,
            max_iterations: 1000,
            initial_b: 2,
            initial_s: 1.0,
        }
    }
}

impl DetectionConfig {
    /// Without pruning.
    pub fn pruneless() -> Self {
        Self {
            pruning_enabled: false,
            ..Self::default()
        }
    }

    /// Without the accelerated arity growth.
    pub fn stepless() -> Self {
        Self {
            accelerated_stepping: false,
            ..Self::default()
        }
    }

    pub fn unweighted() -> Self {
        Self {
            weighted_scores: false,
            ..Self::default()
        }
    }

    pub fn weighting(&self) -> Weighting {
        if self.weighted_scores {
            Weighting::Exponential
        } else {
            Weighting::Uniform
        }
    }

    pub fn validate(&self) -> Result<StopPoint, DetectError> {
        let bad = |m: &str| Err(DetectError::InvalidConfig(m.to_owned()));
        if !(self.anomaly_fraction > 0.0 && self.anomaly_fraction < 1.0) {
            return bad("anomaly_fraction must lie in (0, 1)");
        }
        if !(self.prune_quantile > 0.0 && self.prune_quantile <= 1.0) {
            return bad("prune_quantile must lie in (0, 1]");
        }
        if self.initial_b < 2 {
            return bad("initial_b must be at least 2");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        StopPoint::from_value(self.initial_s).ok_or_else(|| {
            DetectError::InvalidConfig("initial_s must be a non-negative multiple of 0.1".into())
        })
    }
}

/// One line of the iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub i: u32,
    /// Arity used in this iteration.
    pub b: u32,
    /// Stop point after this iteration's schedule step.
    pub s: StopPoint,
    /// Working cases at the start of the iteration.
    pub working: usize,
    /// Cases frozen at the end of the iteration.
    pub pruned: usize,
    /// Working cases with `aas <= s`.
    pub below_s: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Final `aas` per original case id.
    pub scores: Vec<f64>,
    pub iterations_run: u32,
    pub trace: Vec<IterationRecord>,
}

impl DetectionResult {
    pub fn ranks(&self) -> Vec<usize> {
        min_ranks(&self.scores)
    }

    /// The `k` most anomalous cases as `(case_id, aas, rank)`, ordered by
    /// score and then case id.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64, usize)> {
        let ranks = self.ranks();
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(k)
            .map(|g| (g, self.scores[g], ranks[g]))
            .collect()
    }

    pub fn write_trace_jsonl<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_trace_jsonl(&self.trace, out)
    }
}

pub fn write_trace_jsonl<W: Write>(trace: &[IterationRecord], mut out: W) -> std::io::Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// 1-based ranks, ascending by score; tied scores share the smallest rank of
/// their group.
pub fn min_ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0; scores.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && scores[order[end]] == scores[order[pos]] {
            end += 1;
        }
        for &g in &order[pos..end] {
            ranks[g] = pos + 1;
        }
        pos = end;
    }
    ranks
}

/// Runs the detector over every case of `data`.
pub fn detect(data: &Dataset, config: &DetectionConfig) -> Result<DetectionResult, DetectError> {
    let initial_s = config.validate()?;
    if data.width() == 0 {
        return Err(DetectError::NoAttributes);
    }
    let n0 = data.len();
    if n0 == 0 {
        return Err(DetectError::EmptyDataset);
    }

    let weighting = config.weighting();
    let mut scores = vec![f64::NAN; n0];
    let mut working: Vec<usize> = (0..n0).collect();
    let mut aas: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut b = config.initial_b;
    let mut s = initial_s;

    for i in 1..=config.max_iterations {
        let view = discretize(data, &working, b, config.range_policy)
            .expect("working set is non-empty and b >= 2");
        let cf = constellation_frequencies(&view);
        drop(view);
        if i == 1 {
            aas = cf.iter().map(|&c| f64::from(c)).collect();
        } else {
            scoring::update_in_place(&mut aas, &cf, weighting, i);
        }

        let b_used = b;
        (s, b) = schedule_step(i, s, b, config.accelerated_stepping);

        let convergence = check_convergence(&aas, s, n0, config.anomaly_fraction);

        let mut pruned = 0;
        if config.pruning_enabled && i >= config.prune_start_iteration {
            if let Some(frozen) =
                prune::prune_in_place(&mut working, &mut aas, &mut scores, config.prune_quantile)
            {
                pruned = frozen;
            }
        }

        trace.push(IterationRecord {
            i,
            b: b_used,
            s,
            working: cf.len(),
            pruned,
            below_s: convergence.below_s,
        });

        if convergence.converged {
            for (&g, &a) in working.iter().zip(&aas) {
                scores[g] = a;
            }
            return Ok(DetectionResult {
                scores,
                iterations_run: i,
                trace,
            });
        }
    }
    Err(DetectError::NonConvergence {
        max_iterations: config.max_iterations,
        trace,
    })
}
