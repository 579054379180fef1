//! Brute-force checks of planted anomalies against their type definitions.
//!
//! Numerical distances are Euclidean after scaling every numerical
//! attribute to the bulk's `[min, max]` range.
//!
//! * Type I: more than 3 median absolute deviations from the bulk median on
//!   at least one numerical attribute.
//! * Type II: some combination of categorical values occurs at most twice in
//!   the whole dataset.
//! * Type III: inside every bulk marginal range, with the nearest bulk case
//!   farther away than the 99.9th percentile of bulk nearest-neighbor
//!   distances.
//! * Type IV: some combination of categorical values occurs at least three
//!   times in the whole dataset but in none of the case's 10 nearest
//!   neighbors.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{AnomalyType, AttributeKind, Cell, Label, LabeledDataset};

pub const MAD_FACTOR: f64 = 3.0;
pub const SPARSE_MAX: usize = 2;
pub const COMMON_MIN: usize = 3;
pub const NEIGHBORS: usize = 10;
pub const NN_QUANTILE: f64 = 0.999;

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

/// Median absolute deviation from the median, unscaled.
pub(crate) fn mad(values: &[f64]) -> f64 {
    let med = median(values);
    median(&values.iter().map(|v| (v - med).abs()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantCheck {
    pub case: usize,
    pub ty: AnomalyType,
    pub passed: bool,
    /// For types II and IV: size of the smallest categorical combination
    /// meeting the criterion (1 = a single value, 2+ = higher order).
    pub order: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantReport {
    pub checks: Vec<PlantCheck>,
}

impl PlantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PlantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Frame<'a> {
    ld: &'a LabeledDataset,
    numeric: Vec<usize>,
    categorical: Vec<usize>,
    bulk: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl<'a> Frame<'a> {
    fn new(ld: &'a LabeledDataset) -> Self {
        let attrs = ld.data.schema().attributes();
        let numeric: Vec<usize> = (0..attrs.len())
            .filter(|&j| attrs[j].kind == AttributeKind::Numerical)
            .collect();
        let categorical = (0..attrs.len())
            .filter(|&j| attrs[j].kind == AttributeKind::Categorical)
            .collect();
        let bulk: Vec<usize> = (0..ld.data.len())
            .filter(|&g| ld.labels[g] == Label::Normal)
            .collect();
        let mut frame = Self {
            ld,
            numeric,
            categorical,
            bulk,
            lo: Vec::new(),
            hi: Vec::new(),
        };
        for a in 0..frame.numeric.len() {
            let vals = frame.bulk_values(a);
            frame
                .lo
                .push(vals.iter().copied().fold(f64::INFINITY, f64::min));
            frame
                .hi
                .push(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        frame
    }

    fn value(&self, g: usize, a: usize) -> Option<f64> {
        match self.ld.data.cell(g, self.numeric[a]) {
            Cell::Number(v) => Some(v),
            _ => None,
        }
    }

    fn bulk_values(&self, a: usize) -> Vec<f64> {
        self.bulk.iter().filter_map(|&g| self.value(g, a)).collect()
    }

    /// Range-normalized coordinates; Missing maps to NaN.
    fn point(&self, g: usize) -> Vec<f64> {
        (0..self.numeric.len())
            .map(|a| {
                let span = self.hi[a] - self.lo[a];
                match self.value(g, a) {
                    Some(v) if span > 0.0 => (v - self.lo[a]) / span,
                    Some(_) => 0.0,
                    None => f64::NAN,
                }
            })
            .collect()
    }

    fn categories(&self, g: usize) -> Vec<Option<&str>> {
        self.categorical
            .iter()
            .map(|&j| match self.ld.data.cell(g, j) {
                Cell::Category(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    /// Non-empty subsets of categorical attributes, smallest first.
    fn subsets(&self) -> Vec<Vec<usize>> {
        let c = self.categorical.len();
        let mut subsets: Vec<Vec<usize>> = (1u32..(1 << c))
            .map(|mask| (0..c).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        subsets.sort_by_key(Vec::len);
        subsets
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn matches(a: &[Option<&str>], b: &[Option<&str>], subset: &[usize]) -> bool {
    subset.iter().all(|&i| a[i].is_some() && a[i] == b[i])
}

/// Checks every labeled anomaly against its type's criterion.
pub fn verify_plant(ld: &LabeledDataset) -> PlantReport {
    let frame = Frame::new(ld);
    let points: Vec<Vec<f64>> = (0..ld.data.len()).map(|g| frame.point(g)).collect();
    let cats: Vec<Vec<Option<&str>>> = (0..ld.data.len()).map(|g| frame.categories(g)).collect();
    let subsets = frame.subsets();

    let needs_nn = ld.anomalies().any(|(_, t)| t == AnomalyType::III);
    let nn_cut = if needs_nn {
        let mut nn: Vec<f64> = frame
            .bulk
            .par_iter()
            .map(|&g| {
                frame
                    .bulk
                    .iter()
                    .filter(|&&h| h != g)
                    .map(|&h| distance(&points[g], &points[h]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        nn.sort_by(f64::total_cmp);
        let rank = ((NN_QUANTILE * nn.len() as f64).ceil() as usize).clamp(1, nn.len());
        nn[rank - 1]
    } else {
        f64::NAN
    };

    let count =
        |g: usize, subset: &[usize]| cats.iter().filter(|c| matches(&cats[g], c, subset)).count();

    let checks = ld
        .anomalies()
        .map(|(g, ty)| {
            let (passed, order, detail) = match ty {
                AnomalyType::I => {
                    let hit = (0..frame.numeric.len()).find_map(|a| {
                        let v = frame.value(g, a)?;
                        let vals = frame.bulk_values(a);
                        let (med, dev) = (median(&vals), mad(&vals));
                        ((v - med).abs() > MAD_FACTOR * dev).then(|| {
                            format!(
                                "{} = {v} is {:.1} MADs from the bulk median",
                                ld.data.schema().attributes()[frame.numeric[a]].name,
                                (v - med).abs() / dev
                            )
                        })
                    });
                    match hit {
                        Some(d) => (true, None, d),
                        None => (false, None, "within 3 MADs on every attribute".into()),
                    }
                }
                AnomalyType::II => match subsets.iter().find(|s| count(g, s) <= SPARSE_MAX) {
                    Some(s) => (
                        true,
                        Some(s.len()),
                        format!("combination occurs {} time(s)", count(g, s)),
                    ),
                    None => (false, None, "every categorical combination is frequent".into()),
                },
                AnomalyType::III => {
                    let p = &points[g];
                    let inside = p.iter().all(|&x| (0.0..=1.0).contains(&x));
                    let nearest = frame
                        .bulk
                        .iter()
                        .map(|&h| distance(p, &points[h]))
                        .fold(f64::INFINITY, f64::min);
                    let passed = inside && nearest > nn_cut;
                    (
                        passed,
                        None,
                        format!(
                            "inside ranges: {inside}; nearest bulk distance {nearest:.4} vs cut {nn_cut:.4}"
                        ),
                    )
                }
                AnomalyType::IV => {
                    let mut others: Vec<(f64, usize)> = (0..ld.data.len())
                        .filter(|&h| h != g)
                        .map(|h| (distance(&points[g], &points[h]), h))
                        .collect();
                    let k = NEIGHBORS.min(others.len());
                    others.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let neighbors = &others[..k];
                    let hit = subsets.iter().find(|s| {
                        count(g, s) >= COMMON_MIN
                            && neighbors.iter().all(|&(_, h)| !matches(&cats[g], &cats[h], s))
                    });
                    match hit {
                        Some(s) => (
                            true,
                            Some(s.len()),
                            format!(
                                "combination occurs {} times globally, never among {k} neighbors",
                                count(g, s)
                            ),
                        ),
                        None => (false, None, "no locally unique common combination".into()),
                    }
                }
            };
            PlantCheck {
                case: g,
                ty,
                passed,
                order,
                detail,
            }
        })
        .collect();
    PlantReport { checks }
}
