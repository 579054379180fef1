//! Segmentation- and combination-based anomaly detection for mixed
//! categorical and numerical tabular data.
//!
//! The detector repeatedly discretizes numerical attributes into ever finer
//! equiwidth bins, combines each case's bin indices and categorical values
//! into a *constellation*, and scores every case by an exponentially weighted
//! average of how many cases share its constellation. Cases with unique or
//! sparse combinations of values end up with the lowest scores.
//!
//! Alongside the detector the crate ships labeled synthetic generators for
//! four anomaly types and an evaluation toolkit (ROC/PR curves, partial AUC,
//! stratified bootstrap intervals and threshold metrics).

pub mod cli;
pub mod data;
pub mod detector;
pub mod discretizer;
pub mod metrics;
pub mod synth;

pub use data::{Dataset, LabeledDataset, Schema};
pub use detector::{detect, DetectionConfig, DetectionResult};
