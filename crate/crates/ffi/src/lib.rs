//! C interface to the secoda detector.
//!
//! Datasets and results are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`SecodaStatus`]; on failure [`secoda_last_error`] describes the problem
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use secoda::data::{infer_schema_from_path, load_csv, Dataset, Label, MissingTokens};
use secoda::detector::{detect, DetectError, DetectionConfig, DetectionResult};
use secoda::discretizer::RangePolicy;
use secoda::metrics::{roc_auc, ScoredLabels};
use secoda::synth::{generate, GeneratorKind, GeneratorSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecodaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    NonConvergence = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Detector settings. Obtain defaults from [`secoda_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecodaConfig {
    pub anomaly_fraction: f64,
    pub prune_quantile: f64,
    pub pruning_enabled: bool,
    pub accelerated_stepping: bool,
    pub weighted_scores: bool,
    /// Bin edges from the full dataset instead of the working set.
    pub global_range: bool,
    pub max_iterations: u32,
}

impl From<&SecodaConfig> for DetectionConfig {
    fn from(c: &SecodaConfig) -> Self {
        DetectionConfig {
            anomaly_fraction: c.anomaly_fraction,
            prune_quantile: c.prune_quantile,
            pruning_enabled: c.pruning_enabled,
            accelerated_stepping: c.accelerated_stepping,
            weighted_scores: c.weighted_scores,
            range_policy: if c.global_range {
                RangePolicy::Global
            } else {
                RangePolicy::WorkingSet
            },
            max_iterations: c.max_iterations,
            ..DetectionConfig::default()
        }
    }
}

/// Opaque dataset handle. Generated datasets also carry labels.
pub struct SecodaDataset {
    data: Dataset,
    labels: Option<Vec<Label>>,
}

/// Opaque detection result handle.
pub struct SecodaResult {
    result: DetectionResult,
}

struct Failure(SecodaStatus, String);

impl Failure {
    fn invalid(msg: impl ToString) -> Self {
        Failure(SecodaStatus::InvalidArgument, msg.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SecodaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SecodaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            SecodaStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SecodaStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(
            SecodaStatus::NullPointer,
            format!("`{name}` is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn out_slot<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(SecodaStatus::NullPointer, format!("`{name}` is null")))
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn secoda_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn secoda_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn secoda_config_default() -> SecodaConfig {
    let d = DetectionConfig::default();
    SecodaConfig {
        anomaly_fraction: d.anomaly_fraction,
        prune_quantile: d.prune_quantile,
        pruning_enabled: d.pruning_enabled,
        accelerated_stepping: d.accelerated_stepping,
        weighted_scores: d.weighted_scores,
        global_range: d.range_policy == RangePolicy::Global,
        max_iterations: d.max_iterations,
    }
}

/// Loads a CSV file with a header row, inferring attribute kinds. Empty
/// cells and `NA` are read as missing.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut SecodaDataset,
) -> SecodaStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let out = out_slot(out, "out")?;
        let missing = MissingTokens::default();
        let io = |e: secoda::data::DataError| Failure(SecodaStatus::Io, e.to_string());
        let schema = infer_schema_from_path(path, &missing, None).map_err(io)?;
        let data = load_csv(path, &schema, &missing).map_err(io)?;
        *out = Box::into_raw(Box::new(SecodaDataset { data, labels: None }));
        Ok(())
    })
}

/// Generates a labeled synthetic dataset. `kind` is one of `mountain`,
/// `helix`, `timeseries` or `noisymix`; `n = 0` selects the kind's default
/// size.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_generate(
    kind: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut SecodaDataset,
) -> SecodaStatus {
    guard(|| {
        let kind: GeneratorKind = c_str(kind, "kind")?.parse().map_err(Failure::invalid)?;
        let out = out_slot(out, "out")?;
        let spec = if n == 0 {
            GeneratorSpec::with_defaults(kind, seed)
        } else {
            GeneratorSpec::new(kind, n, seed)
        };
        let ld = generate(&spec).map_err(Failure::invalid)?;
        *out = Box::into_raw(Box::new(SecodaDataset {
            data: ld.data,
            labels: Some(ld.labels),
        }));
        Ok(())
    })
}

/// Number of cases, or 0 for a NULL handle.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_len(dataset: *const SecodaDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.len())
}

/// Whether the dataset carries ground-truth labels.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_has_labels(dataset: *const SecodaDataset) -> bool {
    dataset.as_ref().is_some_and(|d| d.labels.is_some())
}

/// Copies the labels into `buf` as 1 (anomaly) or 0 (normal). `len` must be
/// at least the number of cases.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_labels(
    dataset: *const SecodaDataset,
    buf: *mut u8,
    len: usize,
) -> SecodaStatus {
    guard(|| {
        let d = non_null(dataset, "dataset")?;
        let labels = d
            .labels
            .as_ref()
            .ok_or_else(|| Failure::invalid("dataset has no labels"))?;
        if buf.is_null() {
            return Err(Failure(SecodaStatus::NullPointer, "`buf` is null".into()));
        }
        if len < labels.len() {
            return Err(Failure(
                SecodaStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", labels.len()),
            ));
        }
        let buf = std::slice::from_raw_parts_mut(buf, labels.len());
        for (b, l) in buf.iter_mut().zip(labels) {
            *b = u8::from(l.is_anomaly());
        }
        Ok(())
    })
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn secoda_dataset_free(dataset: *mut SecodaDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Runs the detector. `config` may be NULL for the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `config` NULL or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn secoda_detect(
    dataset: *const SecodaDataset,
    config: *const SecodaConfig,
    out: *mut *mut SecodaResult,
) -> SecodaStatus {
    guard(|| {
        let d = non_null(dataset, "dataset")?;
        let out = out_slot(out, "out")?;
        let config = config
            .as_ref()
            .map_or_else(DetectionConfig::default, DetectionConfig::from);
        let result = detect(&d.data, &config).map_err(|e| match e {
            DetectError::NonConvergence { .. } => {
                Failure(SecodaStatus::NonConvergence, e.to_string())
            }
            e => Failure::invalid(e),
        })?;
        *out = Box::into_raw(Box::new(SecodaResult { result }));
        Ok(())
    })
}

/// Number of scored cases, or 0 for a NULL handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn secoda_result_len(result: *const SecodaResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.scores.len())
}

/// Iterations the detector ran, or 0 for a NULL handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn secoda_result_iterations(result: *const SecodaResult) -> u32 {
    result.as_ref().map_or(0, |r| r.result.iterations_run)
}

/// Copies the scores (lower is more anomalous) into `buf` in case order.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn secoda_result_scores(
    result: *const SecodaResult,
    buf: *mut f64,
    len: usize,
) -> SecodaStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let scores = &r.result.scores;
        if buf.is_null() {
            return Err(Failure(SecodaStatus::NullPointer, "`buf` is null".into()));
        }
        if len < scores.len() {
            return Err(Failure(
                SecodaStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", scores.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, scores.len()).copy_from_slice(scores);
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn secoda_result_free(result: *mut SecodaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// ROC AUC of `scores` (low = anomalous) against `labels` (nonzero =
/// anomaly).
///
/// # Safety
/// `scores` and `labels` must each point to `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn secoda_roc_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> SecodaStatus {
    guard(|| {
        if scores.is_null() || labels.is_null() {
            return Err(Failure(
                SecodaStatus::NullPointer,
                "`scores` or `labels` is null".into(),
            ));
        }
        let out = out_slot(out, "out")?;
        let scores = std::slice::from_raw_parts(scores, n).to_vec();
        let labels = std::slice::from_raw_parts(labels, n)
            .iter()
            .map(|&l| l != 0)
            .collect();
        let sl = ScoredLabels::new(scores, labels).map_err(Failure::invalid)?;
        *out = roc_auc(&sl).map_err(Failure::invalid)?.1;
        Ok(())
    })
}
