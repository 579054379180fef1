use std::ffi::{CStr, CString};
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::ptr;

use secoda_ffi::*;

fn last_error() -> Option<String> {
    let p = secoda_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn generated(kind: &str, n: usize, seed: u64) -> *mut SecodaDataset {
    let kind = CString::new(kind).unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { secoda_dataset_generate(kind.as_ptr(), n, seed, &mut ds) };
    assert_eq!(status, SecodaStatus::Ok, "{:?}", last_error());
    ds
}

#[test]
fn generate_detect_and_score() {
    let ds = generated("helix", 0, 3);
    unsafe {
        let n = secoda_dataset_len(ds);
        assert_eq!(n, 1410);
        assert!(secoda_dataset_has_labels(ds));
        let mut labels = vec![0u8; n];
        assert_eq!(
            secoda_dataset_labels(ds, labels.as_mut_ptr(), n),
            SecodaStatus::Ok
        );

        let config = secoda_config_default();
        let mut res = ptr::null_mut();
        assert_eq!(secoda_detect(ds, &config, &mut res), SecodaStatus::Ok);
        assert!(last_error().is_none());
        assert_eq!(secoda_result_len(res), n);
        assert!(secoda_result_iterations(res) >= 1);
        let mut scores = vec![0.0; n];
        assert_eq!(
            secoda_result_scores(res, scores.as_mut_ptr(), n),
            SecodaStatus::Ok
        );

        let mut auc = 0.0;
        assert_eq!(
            secoda_roc_auc(scores.as_ptr(), labels.as_ptr(), n, &mut auc),
            SecodaStatus::Ok
        );
        assert!(auc > 0.99, "auc {auc}");

        // Same scores as the Rust API.
        let ld = secoda::synth::generate(&secoda::synth::GeneratorSpec::with_defaults(
            secoda::synth::GeneratorKind::Helix,
            3,
        ))
        .unwrap();
        let direct = secoda::detect(&ld.data, &secoda::DetectionConfig::default()).unwrap();
        assert_eq!(direct.scores, scores);

        secoda_result_free(res);
        secoda_dataset_free(ds);
    }
}

#[test]
fn default_config_matches_library() {
    let c = secoda_config_default();
    let d = secoda::DetectionConfig::default();
    assert_eq!(c.anomaly_fraction, d.anomaly_fraction);
    assert_eq!(c.prune_quantile, d.prune_quantile);
    assert!(c.pruning_enabled && c.accelerated_stepping && c.weighted_scores);
    assert!(!c.global_range);
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut ds = ptr::null_mut();
        let polis = CString::new("polis").unwrap();
        assert_eq!(
            secoda_dataset_generate(polis.as_ptr(), 0, 0, &mut ds),
            SecodaStatus::InvalidArgument
        );
        assert!(ds.is_null());
        assert!(last_error().unwrap().contains("private"));

        assert_eq!(
            secoda_dataset_generate(ptr::null(), 0, 0, &mut ds),
            SecodaStatus::NullPointer
        );
        let missing = CString::new("/nonexistent/data.csv").unwrap();
        assert_eq!(
            secoda_dataset_load_csv(missing.as_ptr(), &mut ds),
            SecodaStatus::Io
        );

        let mut res = ptr::null_mut();
        assert_eq!(
            secoda_detect(ptr::null(), ptr::null(), &mut res),
            SecodaStatus::NullPointer
        );

        let ds = generated("mountain", 0, 1);
        let mut config = secoda_config_default();
        config.max_iterations = 2;
        assert_eq!(
            secoda_detect(ds, &config, &mut res),
            SecodaStatus::NonConvergence
        );
        config.anomaly_fraction = 2.0;
        assert_eq!(
            secoda_detect(ds, &config, &mut res),
            SecodaStatus::InvalidArgument
        );

        assert_eq!(secoda_detect(ds, ptr::null(), &mut res), SecodaStatus::Ok);
        let mut small = [0.0; 3];
        assert_eq!(
            secoda_result_scores(res, small.as_mut_ptr(), small.len()),
            SecodaStatus::BufferTooSmall
        );
        secoda_result_free(res);
        secoda_dataset_free(ds);

        let (s, l) = ([1.0, 2.0], [1u8, 1]);
        let mut auc = 0.0;
        assert_eq!(
            secoda_roc_auc(s.as_ptr(), l.as_ptr(), 2, &mut auc),
            SecodaStatus::InvalidArgument
        );

        secoda_dataset_free(ptr::null_mut());
        secoda_result_free(ptr::null_mut());
        assert_eq!(secoda_dataset_len(ptr::null()), 0);
    }
}

#[test]
fn load_csv_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "color,size\nred,1\nred,2\nred,1\nblue,NA").unwrap();
    f.flush().unwrap();
    let path = CString::new(f.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            secoda_dataset_load_csv(path.as_ptr(), &mut ds),
            SecodaStatus::Ok
        );
        assert_eq!(secoda_dataset_len(ds), 4);
        assert!(!secoda_dataset_has_labels(ds));
        let mut buf = [0u8; 4];
        assert_eq!(
            secoda_dataset_labels(ds, buf.as_mut_ptr(), 4),
            SecodaStatus::InvalidArgument
        );
        let mut res = ptr::null_mut();
        assert_eq!(secoda_detect(ds, ptr::null(), &mut res), SecodaStatus::Ok);
        let mut scores = [0.0; 4];
        assert_eq!(
            secoda_result_scores(res, scores.as_mut_ptr(), 4),
            SecodaStatus::Ok
        );
        assert_eq!(scores[3], 1.0);
        secoda_result_free(res);
        secoda_dataset_free(ds);
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(secoda_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api_and_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/secoda.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "secoda_last_error",
        "secoda_dataset_load_csv",
        "secoda_dataset_generate",
        "secoda_detect",
        "secoda_result_scores",
        "secoda_result_free",
        "secoda_roc_auc",
        "typedef struct SecodaDataset SecodaDataset;",
        "SECODA_STATUS_NON_CONVERGENCE = 4",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // Syntax-check the header when a C compiler is around.
    if let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    {
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
