//! Equiwidth discretization of numerical attributes.
//!
//! Intervals are left-closed and right-open, except the last bin which also
//! includes the maximum. A constant column collapses to a single bin for any
//! arity, and an all-missing column yields Missing tokens only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Column, Dataset};

#[derive(Debug, Error, PartialEq)]
pub enum DiscretizeError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("value {value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("working set is empty")]
    EmptyWorkingSet,
}

/// Where bin edges come from in each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangePolicy {
    /// Recompute `[lo, hi]` over the current working set.
    #[default]
    WorkingSet,
    /// Always use the range of the full dataset.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinEdges {
    pub attribute: String,
    pub lo: f64,
    pub hi: f64,
    /// Requested arity.
    pub arity: u32,
    /// `bins() + 1` boundaries; empty for an all-missing column.
    pub edges: Vec<f64>,
    pub all_missing: bool,
}

impl BinEdges {
    fn from_range(attribute: &str, lo: f64, hi: f64, arity: u32) -> Self {
        let edges = if lo < hi {
            let width = hi - lo;
            let b = f64::from(arity);
            let mut e: Vec<f64> = (0..arity)
                .map(|k| lo + width * (f64::from(k) / b))
                .collect();
            e.push(hi);
            e
        } else {
            vec![lo, hi]
        };
        Self {
            attribute: attribute.to_owned(),
            lo,
            hi,
            arity,
            edges,
            all_missing: false,
        }
    }

    fn all_missing(attribute: &str, arity: u32) -> Self {
        Self {
            attribute: attribute.to_owned(),
            lo: f64::NAN,
            hi: f64::NAN,
            arity,
            edges: Vec::new(),
            all_missing: true,
        }
    }

    /// Number of bins actually produced: 0 when all-missing, 1 for a constant
    /// column, otherwise the requested arity.
    pub fn bins(&self) -> u32 {
        if self.all_missing {
            0
        } else if self.lo < self.hi {
            self.arity
        } else {
            1
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.bins() <= 1
    }

    /// Bin of an in-range value. Starts from the arithmetic estimate and then
    /// corrects against the stored edges so the result always agrees with a
    /// scan over `edges`.
    #[inline]
    fn locate(&self, v: f64) -> u32 {
        self.locator().locate(v)
    }

    fn locator(&self) -> Locator<'_> {
        let bins = self.bins();
        Locator {
            lo: self.lo,
            scale: if bins > 1 {
                f64::from(bins) / (self.hi - self.lo)
            } else {
                0.0
            },
            last: bins.saturating_sub(1),
            edges: &self.edges,
        }
    }
}

/// Bin lookup with the per-call setup hoisted out of the inner loop.
struct Locator<'e> {
    lo: f64,
    scale: f64,
    last: u32,
    edges: &'e [f64],
}

impl Locator<'_> {
    #[inline]
    fn locate(&self, v: f64) -> u32 {
        if self.last == 0 {
            return 0;
        }
        let guess = ((v - self.lo) * self.scale).floor();
        let mut k = if guess >= 0.0 {
            (guess as u32).min(self.last)
        } else {
            0
        };
        while k > 0 && v < self.edges[k as usize] {
            k -= 1;
        }
        while k < self.last && v >= self.edges[k as usize + 1] {
            k += 1;
        }
        k
    }
}

/// Equiwidth edges over `values` (already stripped of missing cells).
pub fn bin_edges(attribute: &str, values: &[f64], b: u32) -> Result<BinEdges, DiscretizeError> {
    if b == 0 {
        return Err(DiscretizeError::ZeroArity);
    }
    if values.is_empty() {
        return Ok(BinEdges::all_missing(attribute, b));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(BinEdges::from_range(attribute, lo, hi, b))
}

/// Bin index of `value`, or `None` for a missing cell.
pub fn assign_bin(value: Option<f64>, edges: &BinEdges) -> Result<Option<u32>, DiscretizeError> {
    let Some(v) = value else {
        return Ok(None);
    };
    if edges.all_missing || !(edges.lo <= v && v <= edges.hi) {
        return Err(DiscretizeError::OutOfRange {
            value: v,
            lo: edges.lo,
            hi: edges.hi,
        });
    }
    Ok(Some(edges.locate(v)))
}

/// A discretized token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token<'a> {
    Missing,
    Bin(u32),
    Category(&'a str),
}

/// The working set with numerical attributes replaced by bin indices.
///
/// Tokens are stored column-major as dense codes: `0` is Missing, `k + 1` is
/// bin `k` (numerical) or level `k` (categorical). `cardinality[h]` bounds the
/// codes of attribute `h`.
#[derive(Debug, Clone)]
pub struct DiscretizedView<'a> {
    data: &'a Dataset,
    case_ids: &'a [usize],
    codes: Vec<Vec<u32>>,
    cardinality: Vec<u32>,
    edges: Vec<Option<BinEdges>>,
}

impl<'a> DiscretizedView<'a> {
    pub fn len(&self) -> usize {
        self.case_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty()
    }

    pub fn width(&self) -> usize {
        self.codes.len()
    }

    pub fn case_ids(&self) -> &[usize] {
        self.case_ids
    }

    pub fn codes(&self) -> &[Vec<u32>] {
        &self.codes
    }

    pub fn cardinality(&self) -> &[u32] {
        &self.cardinality
    }

    /// Edges used for each numerical attribute (`None` for categorical ones).
    pub fn edges(&self) -> &[Option<BinEdges>] {
        &self.edges
    }

    pub fn token(&self, row: usize, attr: usize) -> Token<'a> {
        let code = self.codes[attr][row];
        if code == 0 {
            return Token::Missing;
        }
        match self.data.column(attr) {
            Column::Numerical(_) => Token::Bin(code - 1),
            Column::Categorical(c) => Token::Category(&c.levels()[(code - 1) as usize]),
        }
    }

    /// Tokens of one working row in schema order.
    pub fn tokens(&self, row: usize) -> Vec<Token<'a>> {
        (0..self.width()).map(|h| self.token(row, h)).collect()
    }
}

fn range_over<'v>(values: impl Iterator<Item = &'v Option<f64>>) -> Option<(f64, f64)> {
    values.flatten().fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Discretizes the numerical attributes of the `working` cases of `data` into
/// `b` equiwidth bins. Categorical and Missing tokens pass through.
pub fn discretize<'a>(
    data: &'a Dataset,
    working: &'a [usize],
    b: u32,
    policy: RangePolicy,
) -> Result<DiscretizedView<'a>, DiscretizeError> {
    if b == 0 {
        return Err(DiscretizeError::ZeroArity);
    }
    if working.is_empty() {
        return Err(DiscretizeError::EmptyWorkingSet);
    }
    let per_column: Vec<(Vec<u32>, u32, Option<BinEdges>)> = data
        .columns()
        .par_iter()
        .zip(data.schema().attributes().par_iter())
        .map(|(col, attr)| match col {
            Column::Numerical(values) => {
                let range = match policy {
                    RangePolicy::WorkingSet => range_over(working.iter().map(|&g| &values[g])),
                    RangePolicy::Global => range_over(values.iter()),
                };
                let edges = match range {
                    Some((lo, hi)) => BinEdges::from_range(&attr.name, lo, hi, b),
                    None => BinEdges::all_missing(&attr.name, b),
                };
                let loc = edges.locator();
                let codes = working
                    .iter()
                    .map(|&g| values[g].map_or(0, |v| loc.locate(v) + 1))
                    .collect();
                (codes, edges.bins() + 1, Some(edges))
            }
            Column::Categorical(c) => {
                let codes = working
                    .iter()
                    .map(|&g| c.codes()[g].map_or(0, |k| k + 1))
                    .collect();
                (codes, c.levels().len() as u32 + 1, None)
            }
        })
        .collect();

    let mut codes = Vec::with_capacity(per_column.len());
    let mut cardinality = Vec::with_capacity(per_column.len());
    let mut edges = Vec::with_capacity(per_column.len());
    for (c, k, e) in per_column {
        codes.push(c);
        cardinality.push(k);
        edges.push(e);
    }
    Ok(DiscretizedView {
        data,
        case_ids: working,
        codes,
        cardinality,
        edges,
    })
}
