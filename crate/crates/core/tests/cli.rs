use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use secoda::cli::RunConfig;
use secoda::data::{infer_schema_from_path, load_csv, read_scores, MissingTokens};
use secoda::detector::{detect, DetectionConfig};

fn secoda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secoda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn rare_class_file(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("classes.csv");
    let mut text = String::from("class\n");
    for _ in 0..99 {
        text.push_str("A\n");
    }
    text.push_str("B\n");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn detect_lists_the_rare_class_first() {
    let dir = tempfile::tempdir().unwrap();
    let input = rare_class_file(dir.path());
    let scores = dir.path().join("scores.csv");
    let out = secoda(&[
        "detect",
        "--input",
        p(&input),
        "--output",
        p(&scores),
        "--top",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("rank,case_id,aas"));
    assert_eq!(text.lines().nth(1), Some("1,99,1"));
    assert_eq!(text.lines().count(), 4);

    let sidecar = fs::read_to_string(dir.path().join("scores.csv.run.json")).unwrap();
    let config = RunConfig::from_json(&sidecar).unwrap();
    assert_eq!(RunConfig::from_json(&config.to_json()).unwrap(), config);
    match config {
        RunConfig::Detect(run) => {
            assert_eq!(run.detection, DetectionConfig::default());
            assert_eq!(run.top, 3);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn flags_compose_pruneless_and_stepless() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("m.csv");
    assert_eq!(
        secoda(&[
            "generate",
            "--kind",
            "mountain",
            "--seed",
            "2",
            "--out",
            p(&data)
        ])
        .status
        .code(),
        Some(0)
    );
    let scores = dir.path().join("s.csv");
    let out = secoda(&[
        "detect",
        "--input",
        p(&data),
        "--no-prune",
        "--no-step",
        "--output",
        p(&scores),
        "--top",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let missing = MissingTokens::default();
    let schema = infer_schema_from_path(&data, &missing, None).unwrap();
    let ds = load_csv(&data, &schema, &missing).unwrap();
    let config = DetectionConfig {
        pruning_enabled: false,
        accelerated_stepping: false,
        ..DetectionConfig::default()
    };
    let expected = detect(&ds, &config).unwrap().scores;
    let got: Vec<f64> = read_scores(&scores)
        .unwrap()
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(secoda(&["detect"]).status.code(), Some(2));
    assert_eq!(
        secoda(&["detect", "--input", p(&dir.path().join("absent.csv"))])
            .status
            .code(),
        Some(2)
    );
    let out = secoda(&[
        "generate",
        "--kind",
        "polis",
        "--out",
        p(&dir.path().join("x.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
    assert_eq!(
        secoda(&[
            "generate",
            "--kind",
            "spiral",
            "--out",
            p(&dir.path().join("x.csv"))
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        secoda(&["bench", "--kind", "helix", "--variants", "fast"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(secoda(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(secoda(&["--help"]).status.code(), Some(0));
}

#[test]
fn iteration_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("h.csv");
    secoda(&["generate", "--kind", "helix", "--out", p(&data)]);
    let trace = dir.path().join("t.jsonl");
    let out = secoda(&[
        "detect",
        "--input",
        p(&data),
        "--max-iter",
        "2",
        "--trace",
        p(&trace),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_to_string(trace).unwrap().lines().count(), 2);
}

#[test]
fn generate_defaults_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = secoda(&[
            "generate",
            "--kind",
            "helix",
            "--seed",
            "5",
            "--out",
            p(path),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 1410);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.labels.csv")).unwrap(),
        fs::read(dir.path().join("b.labels.csv")).unwrap()
    );
    assert!(dir.path().join("a.csv.run.json").exists());
}

fn write_pair(
    dir: &Path,
    scores: &[f64],
    labels: &[&str],
) -> (std::path::PathBuf, std::path::PathBuf) {
    let s = dir.join("scores.csv");
    let l = dir.join("labels.csv");
    let mut st = String::from("case_id,aas,rank\n");
    let mut lt = String::from("case_id,label\n");
    for (g, (v, lab)) in scores.iter().zip(labels).enumerate() {
        st.push_str(&format!("{g},{v},0\n"));
        lt.push_str(&format!("{g},{lab}\n"));
    }
    fs::write(&s, st).unwrap();
    fs::write(&l, lt).unwrap();
    (s, l)
}

#[test]
fn evaluate_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    let scores: Vec<f64> = (0..40).map(f64::from).collect();
    let labels: Vec<&str> = (0..40)
        .map(|g| if g < 4 { "II" } else { "normal" })
        .collect();
    let (s, l) = write_pair(dir.path(), &scores, &labels);
    let m = dir.path().join("metrics.json");
    let (roc, pr, band) = (
        dir.path().join("roc.csv"),
        dir.path().join("pr.csv"),
        dir.path().join("band.csv"),
    );
    let out = secoda(&[
        "evaluate",
        "--scores",
        p(&s),
        "--labels",
        p(&l),
        "--bootstrap",
        "200",
        "--metrics-out",
        p(&m),
        "--roc-out",
        p(&roc),
        "--pr-out",
        p(&pr),
        "--band-out",
        p(&band),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    for key in [
        "roc_auc",
        "pr_auc",
        "partial_auc_specificity",
        "partial_auc_sensitivity",
    ] {
        for field in ["point", "lo", "hi"] {
            assert_eq!(json[key][field], 1.0, "{key}.{field}");
        }
    }
    for crit in ["youden", "mcc"] {
        for key in [
            "sensitivity",
            "specificity",
            "precision",
            "accuracy",
            "f1",
            "mcc",
            "kappa",
        ] {
            assert_eq!(json[crit]["metrics"][key], 1.0, "{crit}.{key}");
        }
    }
    assert_eq!(json["pr_interpolation"], "step");
    assert_eq!(json["config"]["command"], "evaluate");
    assert!(fs::read_to_string(&roc)
        .unwrap()
        .starts_with("fpr,tpr,threshold\n"));
    assert!(fs::read_to_string(&pr)
        .unwrap()
        .starts_with("recall,precision,threshold\n"));
    let band_text = fs::read_to_string(&band).unwrap();
    assert!(band_text.starts_with("fpr,tpr,lo,hi\n"));
    assert_eq!(band_text.lines().count(), 1 + 101);
    assert!(dir.path().join("roc.csv.run.json").exists());
}

#[test]
fn evaluate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let (s, l) = write_pair(dir.path(), &[1.0, 2.0, 3.0], &["I", "normal", "normal"]);
    let out = secoda(&[
        "evaluate",
        "--scores",
        p(&s),
        "--labels",
        p(&l),
        "--bootstrap",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(&l, "case_id,label\n0,I\n1,normal\n7,normal\n").unwrap();
    let out = secoda(&[
        "evaluate",
        "--scores",
        p(&s),
        "--labels",
        p(&l),
        "--bootstrap",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case_id"));
}

fn bench_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "variant",
            "fraction",
            "n",
            "repeat",
            "seconds",
            "iterations",
            "auc"
        ]
    );
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn bench_table_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = secoda(&[
            "bench",
            "--kind",
            "noisymix",
            "--seed",
            "1",
            "--repeats",
            "2",
            "--output",
            p(path),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert!(text.starts_with("variant,slope,intercept,r_squared\n"));
        assert_eq!(text.lines().count(), 4);
    }
    let (ra, rb) = (bench_rows(&a), bench_rows(&b));
    assert_eq!(ra.len(), 3 * 5 * 2);
    let sizes: Vec<&str> = ra[..15].iter().step_by(3).map(|r| r[2].as_str()).collect();
    assert_eq!(sizes, ["773", "1546", "2320", "3093", "3867"]);
    let strip = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                vec![
                    r[0].clone(),
                    r[1].clone(),
                    r[2].clone(),
                    r[5].clone(),
                    r[6].clone(),
                ]
            })
            .collect()
    };
    assert_eq!(strip(&ra), strip(&rb));
    assert_eq!(strip(&ra[..15]), strip(&ra[15..]));
}
