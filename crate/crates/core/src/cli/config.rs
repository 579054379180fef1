//! Fully-resolved run configurations, written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::MissingTokens;
use crate::detector::DetectionConfig;
use crate::synth::GeneratorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Detect(DetectRun),
    Generate(GenerateRun),
    Evaluate(EvaluateRun),
    Bench(BenchRun),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRun {
    pub input: PathBuf,
    pub schema: Option<PathBuf>,
    pub missing_tokens: MissingTokens,
    pub detection: DetectionConfig,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub top: usize,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRun {
    pub spec: GeneratorSpec,
    pub out: PathBuf,
    pub labels_out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRun {
    pub scores: PathBuf,
    pub labels: PathBuf,
    pub bootstrap: usize,
    pub level: f64,
    pub partial_spec: f64,
    pub partial_sens: f64,
    pub seed: u64,
    pub band_points: usize,
    pub metrics_out: Option<PathBuf>,
    pub roc_out: Option<PathBuf>,
    pub pr_out: Option<PathBuf>,
    pub band_out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum BenchSource {
    File {
        input: PathBuf,
        schema: Option<PathBuf>,
        labels: Option<PathBuf>,
        missing_tokens: MissingTokens,
    },
    Synthetic {
        spec: GeneratorSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub source: BenchSource,
    pub variants: Vec<String>,
    pub fractions: usize,
    pub repeats: usize,
    /// Seed of the case order from which the nested subsets are cut.
    pub subset_seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configs always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Writes the config to `<output>.run.json`.
    pub fn write_sidecar(&self, output: &Path) -> std::io::Result<PathBuf> {
        let path = sidecar_path(output);
        fs::write(&path, self.to_json() + "\n")?;
        Ok(path)
    }
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".run.json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::GeneratorKind;

    #[test]
    fn every_command_round_trips() {
        let configs = [
            RunConfig::Detect(DetectRun {
                input: "data.csv".into(),
                schema: Some("schema.json".into()),
                missing_tokens: MissingTokens::new(["", "?"]),
                detection: DetectionConfig::stepless(),
                output: Some("scores.csv".into()),
                trace: None,
                top: 30,
                threads: Some(2),
            }),
            RunConfig::Generate(GenerateRun {
                spec: GeneratorSpec::with_defaults(GeneratorKind::Helix, 9),
                out: "helix.csv".into(),
                labels_out: "helix.labels.csv".into(),
            }),
            RunConfig::Evaluate(EvaluateRun {
                scores: "s.csv".into(),
                labels: "l.csv".into(),
                bootstrap: 1000,
                level: 0.95,
                partial_spec: 0.9,
                partial_sens: 0.8,
                seed: 3,
                band_points: 101,
                metrics_out: None,
                roc_out: Some("roc.csv".into()),
                pr_out: None,
                band_out: None,
                threads: None,
            }),
            RunConfig::Bench(BenchRun {
                source: BenchSource::Synthetic {
                    spec: GeneratorSpec::new(GeneratorKind::TimeSeries, 5000, 1),
                },
                variants: vec!["final".into(), "pruneless".into()],
                fractions: 5,
                repeats: 2,
                subset_seed: 0,
                output: None,
                threads: None,
            }),
        ];
        for cfg in configs {
            let back = RunConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json(), cfg.to_json());
        }
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("out/scores.csv")),
            PathBuf::from("out/scores.csv.run.json")
        );
    }
}
