//! Seeded generators for labeled synthetic datasets with planted anomalies.
//!
//! Four dataset kinds are available, each with a dense, structured bulk of
//! normal cases and a small number of planted anomalies tagged by type:
//!
//! | kind         | attributes        | default n | anomaly types |
//! |--------------|-------------------|-----------|---------------|
//! | `mountain`   | 3 numerical       | 943       | I, III        |
//! | `helix`      | 3 num, 1 categ    | 1410      | I, III, IV    |
//! | `timeseries` | 2 numerical       | 398       | I, III        |
//! | `noisymix`   | 3 num, 2 categ    | 3867      | II, IV        |
//!
//! Output is a pure function of the [`GeneratorSpec`]. [`verify_plant`]
//! checks every planted anomaly against its type's definition by brute force.

mod shapes;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    AnomalyType, Attribute, AttributeKind, Column, Dataset, Label, LabeledDataset, Schema,
};

pub use verify::{verify_plant, PlantCheck, PlantReport};

/// Smallest dataset a generator accepts.
pub const MIN_CASES: usize = 100;
/// Upper bound on the share of planted anomalies.
pub const MAX_ANOMALY_SHARE: f64 = 0.03;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("unknown dataset kind `{0}` (expected mountain, helix, timeseries or noisymix)")]
    UnknownKind(String),
    #[error("`{0}` refers to private register data and cannot be generated")]
    PrivateData(String),
    #[error("n must be at least {MIN_CASES}, got {0}")]
    TooSmall(usize),
    #[error("{kind} datasets do not support type {ty} anomalies")]
    Unsupported {
        kind: GeneratorKind,
        ty: AnomalyType,
    },
    #[error("{kind} datasets need at least one type {ty} anomaly")]
    MissingType {
        kind: GeneratorKind,
        ty: AnomalyType,
    },
    #[error("{count} type {ty} anomalies exceed n/10 for n = {n}")]
    PlantTooLarge {
        ty: AnomalyType,
        count: usize,
        n: usize,
    },
    #[error("{count} anomalies leave less than 97% normal cases for n = {n}")]
    BulkTooSmall { count: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Ridge surface over a plane, 3 numerical attributes.
    Mountain,
    /// 3D helix with a periodic color pattern.
    Helix,
    /// Smooth trajectory over an index attribute.
    TimeSeries,
    /// Noisy clusters with two categorical attributes.
    NoisyMix,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::Mountain,
        GeneratorKind::Helix,
        GeneratorKind::TimeSeries,
        GeneratorKind::NoisyMix,
    ];

    pub fn default_n(self) -> usize {
        match self {
            GeneratorKind::Mountain => 943,
            GeneratorKind::Helix => 1410,
            GeneratorKind::TimeSeries => 398,
            GeneratorKind::NoisyMix => 3867,
        }
    }

    pub fn supported(self) -> &'static [AnomalyType] {
        use AnomalyType::*;
        match self {
            GeneratorKind::Mountain | GeneratorKind::TimeSeries => &[I, III],
            GeneratorKind::Helix => &[I, III, IV],
            GeneratorKind::NoisyMix => &[II, IV],
        }
    }

    /// Per-type counts used when none are given.
    pub fn default_plant(self) -> BTreeMap<AnomalyType, usize> {
        use AnomalyType::*;
        let counts: &[(AnomalyType, usize)] = match self {
            GeneratorKind::Mountain => &[(I, 2), (III, 1)],
            GeneratorKind::Helix => &[(I, 1), (III, 1), (IV, 2)],
            GeneratorKind::TimeSeries => &[(I, 1), (III, 1)],
            GeneratorKind::NoisyMix => &[(II, 1), (IV, 3)],
        };
        counts.iter().copied().collect()
    }

    pub fn schema(self) -> Schema {
        let num = |n: &str| Attribute::new(n, AttributeKind::Numerical);
        let cat = |n: &str| Attribute::new(n, AttributeKind::Categorical);
        let attrs = match self {
            GeneratorKind::Mountain => vec![num("x"), num("y"), num("z")],
            GeneratorKind::Helix => vec![num("x"), num("y"), num("z"), cat("color")],
            GeneratorKind::TimeSeries => vec![num("t"), num("value")],
            GeneratorKind::NoisyMix => {
                vec![num("x"), num("y"), num("z"), cat("group"), cat("shape")]
            }
        };
        Schema::new(attrs).expect("static schema is valid")
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Mountain => "mountain",
            GeneratorKind::Helix => "helix",
            GeneratorKind::TimeSeries => "timeseries",
            GeneratorKind::NoisyMix => "noisymix",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mountain" => Ok(GeneratorKind::Mountain),
            "helix" => Ok(GeneratorKind::Helix),
            "timeseries" => Ok(GeneratorKind::TimeSeries),
            "noisymix" => Ok(GeneratorKind::NoisyMix),
            other if other.starts_with("polis") => Err(SynthError::PrivateData(s.to_string())),
            _ => Err(SynthError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
    pub plant: BTreeMap<AnomalyType, usize>,
}

impl GeneratorSpec {
    /// Spec with the kind's default plant. For small `n` the plant is
    /// reduced to one anomaly per type so that the bulk stays dominant.
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        let mut plant = kind.default_plant();
        let total: usize = plant.values().sum();
        if total as f64 > MAX_ANOMALY_SHARE * n as f64 {
            plant.values_mut().for_each(|c| *c = 1);
        }
        Self {
            kind,
            n,
            seed,
            plant,
        }
    }

    /// Spec at the kind's default size.
    pub fn with_defaults(kind: GeneratorKind, seed: u64) -> Self {
        Self::new(kind, kind.default_n(), seed)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n < MIN_CASES {
            return Err(SynthError::TooSmall(self.n));
        }
        let supported = self.kind.supported();
        for (&ty, &count) in &self.plant {
            if count > 0 && !supported.contains(&ty) {
                return Err(SynthError::Unsupported {
                    kind: self.kind,
                    ty,
                });
            }
            if count * 10 > self.n {
                return Err(SynthError::PlantTooLarge {
                    ty,
                    count,
                    n: self.n,
                });
            }
        }
        for &ty in supported {
            if self.plant.get(&ty).copied().unwrap_or(0) == 0 {
                return Err(SynthError::MissingType {
                    kind: self.kind,
                    ty,
                });
            }
        }
        let total = self.total_planted();
        if total as f64 > MAX_ANOMALY_SHARE * self.n as f64 {
            return Err(SynthError::BulkTooSmall {
                count: total,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn total_planted(&self) -> usize {
        self.plant.values().sum()
    }

    pub fn count(&self, ty: AnomalyType) -> usize {
        self.plant.get(&ty).copied().unwrap_or(0)
    }
}

/// One generated case before shuffling.
#[derive(Debug, Clone)]
pub(crate) struct Case {
    pub(crate) num: Vec<f64>,
    pub(crate) cat: Vec<String>,
    pub(crate) label: Label,
}

impl Case {
    pub(crate) fn normal(num: Vec<f64>, cat: Vec<String>) -> Self {
        Self {
            num,
            cat,
            label: Label::Normal,
        }
    }

    pub(crate) fn anomaly(num: Vec<f64>, cat: Vec<String>, ty: AnomalyType) -> Self {
        Self {
            num,
            cat,
            label: Label::Anomaly(ty),
        }
    }
}

/// Generates the labeled dataset described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<LabeledDataset, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cases = match spec.kind {
        GeneratorKind::Mountain => shapes::mountain(spec, &mut rng),
        GeneratorKind::Helix => shapes::helix(spec, &mut rng),
        GeneratorKind::TimeSeries => shapes::time_series(spec, &mut rng),
        GeneratorKind::NoisyMix => shapes::noisy_mix(spec, &mut rng),
    };
    debug_assert_eq!(cases.len(), spec.n);
    // Time series keep their index order; everything else is shuffled so
    // that case ids carry no information about labels.
    if spec.kind != GeneratorKind::TimeSeries {
        cases.shuffle(&mut rng);
    }
    Ok(assemble(spec.kind.schema(), cases))
}

fn assemble(schema: Schema, cases: Vec<Case>) -> LabeledDataset {
    let n_num = cases[0].num.len();
    let n_cat = cases[0].cat.len();
    let mut columns = Vec::with_capacity(schema.len());
    for j in 0..n_num {
        columns.push(Column::numerical(
            cases.iter().map(|c| Some(c.num[j])).collect(),
        ));
    }
    for j in 0..n_cat {
        columns.push(Column::categorical(
            cases.iter().map(|c| Some(c.cat[j].as_str())),
        ));
    }
    let labels = cases.iter().map(|c| c.label).collect();
    let data = Dataset::new(schema, columns).expect("generated columns match the schema");
    LabeledDataset::new(data, labels).expect("one label per case")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::write_dataset_to;

    #[test]
    fn kinds_parse() {
        assert_eq!(
            "Helix".parse::<GeneratorKind>().unwrap(),
            GeneratorKind::Helix
        );
        assert!(matches!(
            "polis".parse::<GeneratorKind>(),
            Err(SynthError::PrivateData(_))
        ));
        assert!(matches!(
            "spiral".parse::<GeneratorKind>(),
            Err(SynthError::UnknownKind(_))
        ));
        for k in GeneratorKind::ALL {
            assert_eq!(k.to_string().parse::<GeneratorKind>().unwrap(), k);
        }
    }

    #[test]
    fn mountain_example() {
        let ld = generate(&GeneratorSpec::new(GeneratorKind::Mountain, 943, 7)).unwrap();
        assert_eq!(ld.data.len(), 943);
        assert_eq!(ld.data.width(), 3);
        let types: Vec<AnomalyType> = ld.anomalies().map(|(_, t)| t).collect();
        assert!(types.contains(&AnomalyType::I));
        assert!(types.contains(&AnomalyType::III));
    }

    #[test]
    fn schemas_match_kinds() {
        for k in GeneratorKind::ALL {
            let ld = generate(&GeneratorSpec::with_defaults(k, 1)).unwrap();
            assert_eq!(ld.data.schema(), &k.schema());
            assert_eq!(ld.data.len(), k.default_n());
            let normal = ld.labels.iter().filter(|l| !l.is_anomaly()).count();
            assert!(normal as f64 >= 0.97 * ld.data.len() as f64);
        }
    }

    #[test]
    fn deterministic_bytes() {
        for k in GeneratorKind::ALL {
            let spec = GeneratorSpec::new(k, 500, 42);
            let render = |ld: &LabeledDataset| {
                let mut buf = Vec::new();
                write_dataset_to(&ld.data, &mut buf).unwrap();
                buf
            };
            let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
            assert_eq!(render(&a), render(&b));
            assert_eq!(a.labels, b.labels);
        }
    }

    #[test]
    fn small_n_gets_reduced_plant() {
        let spec = GeneratorSpec::new(GeneratorKind::Helix, 100, 0);
        assert_eq!(spec.total_planted(), 3);
        assert!(generate(&spec).is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut spec = GeneratorSpec::with_defaults(GeneratorKind::Mountain, 0);
        spec.n = 99;
        assert_eq!(spec.validate(), Err(SynthError::TooSmall(99)));

        let mut spec = GeneratorSpec::with_defaults(GeneratorKind::Mountain, 0);
        spec.plant.insert(AnomalyType::IV, 1);
        assert!(matches!(
            spec.validate(),
            Err(SynthError::Unsupported { .. })
        ));

        let mut spec = GeneratorSpec::with_defaults(GeneratorKind::Helix, 0);
        spec.plant.remove(&AnomalyType::IV);
        assert!(matches!(
            spec.validate(),
            Err(SynthError::MissingType { .. })
        ));

        let mut spec = GeneratorSpec::new(GeneratorKind::TimeSeries, 100, 0);
        spec.plant.insert(AnomalyType::I, 11);
        assert!(matches!(
            spec.validate(),
            Err(SynthError::PlantTooLarge { .. })
        ));

        let mut spec = GeneratorSpec::new(GeneratorKind::TimeSeries, 200, 0);
        spec.plant.insert(AnomalyType::I, 6);
        assert!(matches!(
            spec.validate(),
            Err(SynthError::BulkTooSmall { .. })
        ));
    }
}
