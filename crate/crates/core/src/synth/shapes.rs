//! Bulk shapes and anomaly placement for each dataset kind.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::verify::{mad, median};
use super::{Case, GeneratorSpec};
use crate::data::AnomalyType;

/// `m` points on a jittered grid over the unit square: one point per
/// randomly chosen grid cell, uniformly placed inside it.
fn jittered_grid(m: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let g = (m as f64).sqrt().ceil() as usize;
    let mut cells: Vec<usize> = (0..g * g).collect();
    cells.shuffle(rng);
    cells.truncate(m);
    cells.sort_unstable();
    cells
        .into_iter()
        .map(|c| {
            let (i, j) = (c / g, c % g);
            (
                (i as f64 + rng.random::<f64>()) / g as f64,
                (j as f64 + rng.random::<f64>()) / g as f64,
            )
        })
        .collect()
}

fn jitter(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    rng.random_range(-half_width..=half_width)
}

fn no_cats() -> Vec<String> {
    Vec::new()
}

fn ridge(x: f64, y: f64) -> f64 {
    let peak = 0.6 * (-((x - 0.45).powi(2) + (y - 0.55).powi(2)) / (2.0 * 0.18 * 0.18)).exp();
    peak + 0.12 * x + 0.08 * (PI * y).sin()
}

pub(super) fn mountain(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Case> {
    let m = spec.n - spec.total_planted();
    let mut cases: Vec<Case> = jittered_grid(m, rng)
        .into_iter()
        .map(|(x, y)| Case::normal(vec![x, y, ridge(x, y) + jitter(rng, 0.01)], no_cats()))
        .collect();

    let z: Vec<f64> = cases.iter().map(|c| c.num[2]).collect();
    let (z_med, z_mad) = (median(&z), mad(&z));
    for k in 0..spec.count(AnomalyType::I) {
        let y = rng.random_range(0.2..0.8);
        let case = if k % 2 == 0 {
            // Far above the surface.
            let x = rng.random_range(0.2..0.8);
            vec![x, y, z_med + rng.random_range(8.0..10.0) * z_mad]
        } else {
            // Beyond the plane's edge, continuing the surface.
            let x = rng.random_range(1.45..1.6);
            vec![x, y, ridge(1.0, y)]
        };
        cases.push(Case::anomaly(case, no_cats(), AnomalyType::I));
    }
    for _ in 0..spec.count(AnomalyType::III) {
        // Underneath the peak: every marginal is ordinary, the point is not.
        let x = 0.45 + jitter(rng, 0.05);
        let y = 0.55 + jitter(rng, 0.05);
        let z = ridge(x, y) - rng.random_range(0.4..0.45);
        cases.push(Case::anomaly(vec![x, y, z], no_cats(), AnomalyType::III));
    }
    cases
}

const COLORS: [&str; 4] = ["red", "green", "blue", "yellow"];
const HELIX_TURNS: f64 = 4.0;
const HELIX_HEIGHT: f64 = 2.0;

fn helix_point(t: f64, radial: f64, vertical: f64) -> Vec<f64> {
    let r = 1.0 + radial;
    vec![
        r * t.cos(),
        r * t.sin(),
        HELIX_HEIGHT * t / (HELIX_TURNS * TAU) + vertical,
    ]
}

/// Each quarter turn of the helix has its own color. The blocks start at
/// 45 degrees so that their borders stay clear of the coordinate axes.
fn quarter(t: f64) -> usize {
    ((t - PI / 4.0).rem_euclid(TAU) / (PI / 2.0)) as usize % 4
}

pub(super) fn helix(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Case> {
    let m = spec.n - spec.total_planted();
    let span = HELIX_TURNS * TAU;
    let mut cases: Vec<Case> = (0..m)
        .map(|k| {
            let t = (k as f64 + rng.random::<f64>()) / m as f64 * span;
            let p = helix_point(t, jitter(rng, 0.04), jitter(rng, 0.02));
            Case::normal(p, vec![COLORS[quarter(t)].to_string()])
        })
        .collect();

    let color = |rng: &mut ChaCha8Rng| COLORS[rng.random_range(0..4)].to_string();
    for _ in 0..spec.count(AnomalyType::I) {
        let p = vec![
            rng.random_range(2.6..2.8),
            jitter(rng, 0.5),
            rng.random_range(0.6..1.4),
        ];
        let c = color(rng);
        cases.push(Case::anomaly(p, vec![c], AnomalyType::I));
    }
    for _ in 0..spec.count(AnomalyType::III) {
        let p = vec![
            jitter(rng, 0.1),
            jitter(rng, 0.1),
            rng.random_range(0.6..1.4),
        ];
        let c = color(rng);
        cases.push(Case::anomaly(p, vec![c], AnomalyType::III));
    }
    // Type IV cases sit on the helix inside a color block, colored like the
    // opposite side. Each takes its own slot (turn, block, offset along the
    // block) so that no two of them are neighbors.
    let mut slots: Vec<(usize, usize, usize)> = (0..HELIX_TURNS as usize)
        .flat_map(|turn| (0..4).flat_map(move |q| (0..3).map(move |o| (turn, q, o))))
        .collect();
    slots.shuffle(rng);
    // Middle slots first: they are farthest from block borders and helix ends.
    slots.sort_by_key(|&(turn, _, o)| (turn == 0 || turn + 1 == HELIX_TURNS as usize, o != 1));
    for j in 0..spec.count(AnomalyType::IV) {
        let (turn, q, o) = slots[j % slots.len()];
        let t = turn as f64 * TAU
            + q as f64 * PI / 2.0
            + PI / 2.0
            + (o as f64 - 1.0) * 0.35
            + jitter(rng, 0.05);
        let p = helix_point(t, jitter(rng, 0.02), jitter(rng, 0.01));
        cases.push(Case::anomaly(
            p,
            vec![COLORS[(quarter(t) + 2) % 4].to_string()],
            AnomalyType::IV,
        ));
    }
    cases
}

pub(super) fn time_series(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Case> {
    let n = spec.n;
    let phase = rng.random_range(0.0..TAU);
    let curve = |t: f64| {
        20.0 + 3.0 * (TAU * t / 200.0 + phase).sin() + 0.6 * (TAU * t / 45.0 + 2.0 * phase).sin()
    };
    let mut values: Vec<f64> = (0..n)
        .map(|t| curve(t as f64) + jitter(rng, 0.05))
        .collect();
    let mut labels = vec![None; n];

    let (v_med, v_mad) = (median(&values), mad(&values));
    let (v_min, v_max) = values
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = v_max - v_min;
    let margin = n / 10;
    let free = |labels: &[Option<AnomalyType>], t: usize| {
        labels[t.saturating_sub(3)..(t + 4).min(n)]
            .iter()
            .all(Option::is_none)
    };

    for _ in 0..spec.count(AnomalyType::I) {
        let t = loop {
            let t = rng.random_range(margin..n - margin);
            if free(&labels, t) {
                break t;
            }
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        values[t] = v_med + sign * rng.random_range(5.0..6.0) * v_mad;
        labels[t] = Some(AnomalyType::I);
    }

    // Type III: a dip from a local high, staying inside the observed range.
    let mut highs: Vec<usize> = (margin..n - margin)
        .filter(|&t| curve(t as f64) > v_max - 0.25 * range)
        .collect();
    highs.shuffle(rng);
    let mut placed = 0;
    for &t in &highs {
        if placed == spec.count(AnomalyType::III) {
            break;
        }
        if !free(&labels, t) {
            continue;
        }
        values[t] = curve(t as f64) - rng.random_range(0.45..0.5) * range;
        labels[t] = Some(AnomalyType::III);
        placed += 1;
    }
    assert_eq!(
        placed,
        spec.count(AnomalyType::III),
        "series too short for the plant"
    );

    values
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(t, (v, l))| {
            let num = vec![t as f64, v];
            match l {
                Some(ty) => Case::anomaly(num, no_cats(), ty),
                None => Case::normal(num, no_cats()),
            }
        })
        .collect()
}

const CENTERS: [[f64; 3]; 4] = [
    [0.25, 0.25, 0.25],
    [0.75, 0.75, 0.25],
    [0.75, 0.25, 0.75],
    [0.25, 0.75, 0.75],
];
const BLOB_WEIGHTS: [f64; 4] = [0.3, 0.25, 0.25, 0.2];
/// Two (group, shape) combinations per cluster.
const COMBOS: [[(&str, &str); 2]; 4] = [
    [("alpha", "circle"), ("beta", "square")],
    [("alpha", "square"), ("gamma", "circle")],
    [("gamma", "triangle"), ("delta", "circle")],
    [("delta", "square"), ("beta", "triangle")],
];
/// Per cluster: both values occur in the cluster, the pair only elsewhere.
const FOREIGN_PAIR: [(&str, &str); 4] = [
    ("alpha", "square"),
    ("alpha", "circle"),
    ("gamma", "circle"),
    ("beta", "square"),
];
/// Per cluster: the group value never occurs in the cluster.
const FOREIGN_VALUE: [(&str, &str); 4] = [
    ("gamma", "circle"),
    ("delta", "circle"),
    ("alpha", "square"),
    ("gamma", "triangle"),
];

struct Blob {
    center: [f64; 3],
    sigma: [f64; 3],
    share: f64,
}

impl Blob {
    /// Gaussian draw truncated at 2.5 sigma per axis.
    fn draw(&self, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
        (0..3)
            .map(|a| {
                let d = Normal::new(0.0, self.sigma[a] * scale).expect("positive sigma");
                loop {
                    let v = d.sample(rng);
                    if v.abs() <= 2.5 * self.sigma[a] * scale {
                        return self.center[a] + v;
                    }
                }
            })
            .collect()
    }
}

pub(super) fn noisy_mix(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Case> {
    let m = spec.n - spec.total_planted();
    let blobs: Vec<Blob> = (0..4)
        .map(|k| Blob {
            center: CENTERS[k].map(|c| c + jitter(rng, 0.03)),
            sigma: [0; 3].map(|_| rng.random_range(0.05..0.07)),
            share: BLOB_WEIGHTS[k],
        })
        .collect();
    let mix: Vec<f64> = (0..4).map(|_| rng.random_range(0.4..0.6)).collect();

    let mut cases = Vec::with_capacity(spec.n);
    let mut cum = 0.0;
    let mut start = 0;
    for (k, blob) in blobs.iter().enumerate() {
        cum += blob.share;
        let end = if k == 3 {
            m
        } else {
            (cum * m as f64).round() as usize
        };
        for _ in start..end {
            let (g, s) = COMBOS[k][usize::from(rng.random::<f64>() >= mix[k])];
            cases.push(Case::normal(blob.draw(rng, 1.0), vec![g.into(), s.into()]));
        }
        start = end;
    }

    for j in 0..spec.count(AnomalyType::II) {
        let k = rng.random_range(0..4);
        let (_, s) = COMBOS[k][0];
        cases.push(Case::anomaly(
            blobs[k].draw(rng, 0.3),
            vec![format!("rare{j}"), s.into()],
            AnomalyType::II,
        ));
    }
    let offset = rng.random_range(0..4);
    for j in 0..spec.count(AnomalyType::IV) {
        let k = (j + offset) % 4;
        let (g, s) = if j % 2 == 0 {
            FOREIGN_PAIR[k]
        } else {
            FOREIGN_VALUE[k]
        };
        cases.push(Case::anomaly(
            blobs[k].draw(rng, 0.3),
            vec![g.into(), s.into()],
            AnomalyType::IV,
        ));
    }
    cases
}
