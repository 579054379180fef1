//! Pruning of the most normal cases and the convergence check.

use super::schedule::StopPoint;

/// Minimum number of cases that must stay in the working set after pruning.
pub const MIN_RETAINED: usize = 2;

/// Empirical quantile without interpolation: the value of rank
/// `floor(q * m) + 1` (capped at `m`) in ascending order.
///
/// With distinct values, exactly `m - floor(q * m)` values are `>=` the
/// result, which is `ceil((1 - q) * m)`.
pub fn upper_quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty set");
    let m = values.len();
    // The small offset keeps products such as 0.95 * 60 from landing just
    // below an integer.
    let rank = (((q * m as f64) + 1e-9).floor() as usize + 1).min(m);
    let mut keys: Vec<u64> = values.iter().map(|&v| order_key(v)).collect();
    let (_, k, _) = keys.select_nth_unstable(rank - 1);
    from_order_key(*k)
}

/// Maps `f64` to `u64` preserving `f64::total_cmp` order.
fn order_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

fn from_order_key(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    /// Positions (into the scored slice) that stay in the working set.
    pub retained: Vec<usize>,
    /// Positions frozen with their current score.
    pub frozen: Vec<usize>,
    /// Quantile value used as the cut.
    pub threshold: f64,
    /// Pruning was skipped because fewer than [`MIN_RETAINED`] cases would remain.
    pub guard_fired: bool,
}

/// Freezes every case whose score is at or above the `quantile` value.
pub fn prune(aas: &[f64], quantile: f64) -> PruneOutcome {
    assert!(!aas.is_empty(), "cannot prune an empty working set");
    let threshold = upper_quantile(aas, quantile);
    let (frozen, retained): (Vec<usize>, Vec<usize>) =
        (0..aas.len()).partition(|&k| aas[k] >= threshold);
    if retained.len() < MIN_RETAINED {
        return PruneOutcome {
            retained: (0..aas.len()).collect(),
            frozen: Vec::new(),
            threshold,
            guard_fired: true,
        };
    }
    PruneOutcome {
        retained,
        frozen,
        threshold,
        guard_fired: false,
    }
}

/// Same cut as [`prune`], applied by compacting `working` and `aas` in
/// place. Frozen cases get their score written to `scores[case]`. Returns
/// the number of frozen cases, or `None` when the guard fires.
pub(crate) fn prune_in_place(
    working: &mut Vec<usize>,
    aas: &mut Vec<f64>,
    scores: &mut [f64],
    quantile: f64,
) -> Option<usize> {
    let threshold = upper_quantile(aas, quantile);
    let retained = aas.iter().filter(|&&a| a < threshold).count();
    if retained < MIN_RETAINED {
        return None;
    }
    let mut kept = 0;
    for k in 0..aas.len() {
        let (g, a) = (working[k], aas[k]);
        if a >= threshold {
            scores[g] = a;
        } else {
            working[kept] = g;
            aas[kept] = a;
            kept += 1;
        }
    }
    let frozen = aas.len() - kept;
    working.truncate(kept);
    aas.truncate(kept);
    Some(frozen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergence {
    /// Working cases with `aas <= s`.
    pub below_s: usize,
    pub converged: bool,
}

/// Stops once the share of working cases at or below `s`, relative to the
/// original dataset size, strictly exceeds `fraction`.
pub fn check_convergence(
    working_aas: &[f64],
    s: StopPoint,
    n0: usize,
    fraction: f64,
) -> Convergence {
    assert!(n0 >= 1);
    let below_s = working_aas.iter().filter(|&&a| s.admits(a)).count();
    Convergence {
        below_s,
        converged: below_s as f64 / n0 as f64 > fraction,
    }
}
