//! Constellations: the ordered tuple of a case's categorical values and
//! discretized bin indices, and how often each one occurs.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::discretizer::{DiscretizedView, Token};

/// Injective byte encoding of an ordered token tuple.
///
/// Each token is written with a tag byte and, for categories, a length
/// prefix, so that tuples such as `("A", "B")` and `("AB", "")` never
/// collide and Missing never equals a literal `"Missing"` category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstellationKey(Vec<u8>);

impl ConstellationKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

const TAG_MISSING: u8 = 0;
const TAG_BIN: u8 = 1;
const TAG_CATEGORY: u8 = 2;

pub fn encode_constellation(tokens: &[Token<'_>]) -> ConstellationKey {
    let mut buf = Vec::with_capacity(tokens.len() * 6);
    for t in tokens {
        match *t {
            Token::Missing => buf.push(TAG_MISSING),
            Token::Bin(k) => {
                buf.push(TAG_BIN);
                buf.extend_from_slice(&k.to_le_bytes());
            }
            Token::Category(s) => {
                buf.push(TAG_CATEGORY);
                buf.extend_from_slice(&(s.len() as u64).to_le_bytes());
                buf.extend_from_slice(s.as_bytes());
            }
        }
    }
    ConstellationKey(buf)
}

/// Constellation of every working case and the number of cases sharing it.
///
/// Group ids are dense and assigned in order of first occurrence.
#[derive(Debug, Clone)]
pub struct ConstellationTable {
    group_of: Vec<u32>,
    counts: Vec<u32>,
}

impl ConstellationTable {
    /// Groups the rows of a discretized view by their full token tuple.
    pub fn build(view: &DiscretizedView<'_>) -> Self {
        group_rows(view.codes(), view.cardinality(), view.len())
    }

    /// Number of distinct constellations.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn group_of(&self, row: usize) -> u32 {
        self.group_of[row]
    }

    /// `ccf_k`, indexed by group id.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Frequency of the constellation of each working row.
    pub fn case_frequencies(&self) -> Vec<u32> {
        self.group_of
            .par_iter()
            .map(|&k| self.counts[k as usize])
            .collect()
    }
}

/// `cf_g` for every row of the view.
pub fn constellation_frequencies(view: &DiscretizedView<'_>) -> Vec<u32> {
    ConstellationTable::build(view).case_frequencies()
}

// Keys are mixed-radix numbers `sum(code_h * prod(card_j, j > h))`. When the
// radix product would overflow `u64`, the partial keys are renumbered densely
// first and packing resumes from the smaller range.
fn group_rows(columns: &[Vec<u32>], cardinality: &[u32], n: usize) -> ConstellationTable {
    let mut keys = vec![0u64; n];
    let mut span: u64 = 1;
    for (col, &card) in columns.iter().zip(cardinality) {
        let card = u64::from(card.max(1));
        if span.checked_mul(card).is_none() {
            let (ids, counts) = densify(&keys, span);
            keys.par_iter_mut()
                .zip(ids.par_iter())
                .for_each(|(k, &id)| *k = u64::from(id));
            span = counts.len() as u64;
        }
        keys.par_iter_mut()
            .zip(col.par_iter())
            .for_each(|(k, &c)| *k = *k * card + u64::from(c));
        span *= card;
    }
    let (group_of, counts) = densify(&keys, span);
    ConstellationTable { group_of, counts }
}

const DENSE_FLOOR: u64 = 1 << 22;

fn densify(keys: &[u64], span: u64) -> (Vec<u32>, Vec<u32>) {
    let mut ids = Vec::with_capacity(keys.len());
    let mut counts: Vec<u32> = Vec::new();
    // A direct-address table costs one pass over `span` slots; it beats
    // hashing until the table dwarfs the row count.
    let dense_limit = (keys.len() as u64).saturating_mul(16).max(DENSE_FLOOR);
    if span <= dense_limit {
        let mut table = vec![u32::MAX; span as usize];
        for &k in keys {
            let slot = &mut table[k as usize];
            if *slot == u32::MAX {
                *slot = counts.len() as u32;
                counts.push(0);
            }
            counts[*slot as usize] += 1;
            ids.push(*slot);
        }
    } else {
        let mut table: FxHashMap<u64, u32> = FxHashMap::default();
        table.reserve(keys.len().min(1 << 20));
        for &k in keys {
            let next = counts.len() as u32;
            let id = *table.entry(k).or_insert(next);
            if id == next {
                counts.push(0);
            }
            counts[id as usize] += 1;
            ids.push(id);
        }
    }
    (ids, counts)
}
