use serde::{Deserialize, Serialize};

/// How the average anomaly score combines iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// `aas_i = (aas_{i-1} + cf_i) / 2`: the current frequency weighs as much
    /// as all previous iterations together.
    #[default]
    Exponential,
    /// Plain running mean of all frequencies seen so far.
    Uniform,
}

/// Returns the scores after iteration `iteration` (1-based).
pub fn update_scores(
    prev: Option<&[f64]>,
    cf: &[u32],
    weighting: Weighting,
    iteration: u32,
) -> Vec<f64> {
    match prev {
        None => cf.iter().map(|&c| f64::from(c)).collect(),
        Some(prev) => {
            let mut out = prev.to_vec();
            update_in_place(&mut out, cf, weighting, iteration);
            out
        }
    }
}

pub(crate) fn update_in_place(aas: &mut [f64], cf: &[u32], weighting: Weighting, iteration: u32) {
    debug_assert_eq!(aas.len(), cf.len());
    match weighting {
        Weighting::Exponential => {
            for (a, &c) in aas.iter_mut().zip(cf) {
                *a = 0.5 * (*a + f64::from(c));
            }
        }
        Weighting::Uniform => {
            let i = f64::from(iteration);
            for (a, &c) in aas.iter_mut().zip(cf) {
                *a = (*a * (i - 1.0) + f64::from(c)) / i;
            }
        }
    }
}

/// Closed-form weight of iteration `j` in the exponentially weighted score
/// after `i` iterations: `2^-(i-1)` for the first, `2^-(i-j+1)` otherwise.
pub fn exponential_weight(j: u32, i: u32) -> f64 {
    assert!(1 <= j && j <= i);
    if j == 1 {
        0.5f64.powi((i - 1) as i32)
    } else {
        0.5f64.powi((i - j + 1) as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_iteration_is_frequency() {
        assert_eq!(
            update_scores(None, &[7], Weighting::Exponential, 1),
            vec![7.0]
        );
    }

    #[test]
    fn weighted_examples() {
        assert_eq!(
            update_scores(Some(&[4.0]), &[2], Weighting::Exponential, 2),
            vec![3.0]
        );
        let mut aas = update_scores(None, &[8], Weighting::Exponential, 1);
        aas = update_scores(Some(&aas), &[4], Weighting::Exponential, 2);
        aas = update_scores(Some(&aas), &[2], Weighting::Exponential, 3);
        assert_eq!(aas, vec![4.0]);
    }

    #[test]
    fn uniform_is_running_mean() {
        let mut aas = update_scores(None, &[8], Weighting::Uniform, 1);
        aas = update_scores(Some(&aas), &[4], Weighting::Uniform, 2);
        aas = update_scores(Some(&aas), &[3], Weighting::Uniform, 3);
        assert_eq!(aas, vec![5.0]);
    }

    #[test]
    fn weights_sum_to_one() {
        for i in 1..=30 {
            let total: f64 = (1..=i).map(|j| exponential_weight(j, i)).sum();
            assert_eq!(total, 1.0);
            assert_eq!(exponential_weight(i, i), if i == 1 { 1.0 } else { 0.5 });
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_closed_form(cf in prop::collection::vec(1u32..100_000, 1..=30)) {
            let mut aas: Option<Vec<f64>> = None;
            for (idx, &c) in cf.iter().enumerate() {
                aas = Some(update_scores(aas.as_deref(), &[c], Weighting::Exponential, idx as u32 + 1));
            }
            let got = aas.unwrap()[0];
            let i = cf.len() as u32;
            let closed: f64 = cf
                .iter()
                .enumerate()
                .map(|(idx, &c)| exponential_weight(idx as u32 + 1, i) * f64::from(c))
                .sum();
            prop_assert!(((got - closed) / closed).abs() <= 1e-9);
        }
    }
}
