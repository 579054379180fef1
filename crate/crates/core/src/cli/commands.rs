use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::bench::{run_bench, BenchReport, Variant};
use super::config::{BenchRun, BenchSource, DetectRun, EvaluateRun, GenerateRun, RunConfig};
use super::{BenchArgs, CliError, Command, DetectArgs, EvaluateArgs, GenerateArgs, RangeArg};
use crate::data::{
    infer_schema_from_path, load_csv, read_labels, read_scores, write_dataset, write_labels,
    write_scores, Dataset, Label, MissingTokens, Schema,
};
use crate::detector::{detect, write_trace_jsonl, DetectError, DetectionConfig};
use crate::discretizer::RangePolicy;
use crate::metrics::{
    best_threshold, bootstrap_many, pr_auc, roc_auc, roc_band, BestThreshold, BootstrapCI,
    Criterion, PartialRange, ScoredLabels, Statistic, PR_INTERPOLATION,
};
use crate::synth::{generate, GeneratorKind, GeneratorSpec};

pub(super) fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Detect(a) => cmd_detect(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn missing_tokens(tokens: &[String]) -> MissingTokens {
    if tokens.is_empty() {
        MissingTokens::default()
    } else {
        MissingTokens::new(tokens.iter().cloned())
    }
}

fn load_input(
    input: &Path,
    schema: Option<&Path>,
    missing: &MissingTokens,
) -> Result<Dataset, CliError> {
    let schema = match schema {
        Some(p) => Schema::read_json(p)?,
        None => infer_schema_from_path(input, missing, None)?,
    };
    Ok(load_csv(input, &schema, missing)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(path))
}

fn sidecar(config: &RunConfig, output: &Path) -> Result<(), CliError> {
    config
        .write_sidecar(output)
        .map(drop)
        .map_err(CliError::io(output))
}

fn write_points<T: Serialize>(points: &[T], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for p in points {
        w.serialize(p).map_err(crate::data::DataError::from)?;
    }
    w.flush().map_err(CliError::io(path))
}

fn cmd_detect(a: DetectArgs) -> Result<(), CliError> {
    let missing = missing_tokens(&a.missing_tokens);
    let detection = DetectionConfig {
        anomaly_fraction: a.fraction,
        prune_quantile: a.prune_quantile,
        pruning_enabled: !a.no_prune,
        accelerated_stepping: !a.no_step,
        weighted_scores: !a.unweighted,
        range_policy: match a.range {
            RangeArg::Working => RangePolicy::WorkingSet,
            RangeArg::Global => RangePolicy::Global,
        },
        max_iterations: a.max_iter,
        ..DetectionConfig::default()
    };
    detection.validate()?;
    let config = RunConfig::Detect(DetectRun {
        input: a.input.clone(),
        schema: a.schema.clone(),
        missing_tokens: missing.clone(),
        detection: detection.clone(),
        output: a.output.clone(),
        trace: a.trace.clone(),
        top: a.top,
        threads: a.threads,
    });

    let data = load_input(&a.input, a.schema.as_deref(), &missing)?;
    let result = match with_pool(a.threads, || detect(&data, &detection))? {
        Ok(r) => r,
        Err(DetectError::NonConvergence {
            max_iterations,
            trace,
        }) => {
            if let Some(path) = &a.trace {
                write_trace_jsonl(&trace, create(path)?).map_err(CliError::io(path))?;
                sidecar(&config, path)?;
            }
            return Err(DetectError::NonConvergence {
                max_iterations,
                trace,
            }
            .into());
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = &a.output {
        write_scores(&result, path)?;
        sidecar(&config, path)?;
    }
    if let Some(path) = &a.trace {
        result
            .write_trace_jsonl(create(path)?)
            .map_err(CliError::io(path))?;
        sidecar(&config, path)?;
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let print = |out: &mut io::StdoutLock<'_>| -> io::Result<()> {
        if a.top == 0 {
            return Ok(());
        }
        writeln!(out, "rank,case_id,aas")?;
        for (g, aas, rank) in result.top_k(a.top) {
            writeln!(out, "{rank},{g},{aas}")?;
        }
        out.flush()
    };
    print(&mut out).map_err(CliError::io("<stdout>"))
}

fn cmd_generate(a: GenerateArgs) -> Result<(), CliError> {
    let kind: GeneratorKind = a.kind.parse()?;
    let spec = match a.n {
        Some(n) => GeneratorSpec::new(kind, n, a.seed),
        None => GeneratorSpec::with_defaults(kind, a.seed),
    };
    let labels_out = a
        .labels_out
        .clone()
        .unwrap_or_else(|| a.out.with_extension("labels.csv"));
    let config = RunConfig::Generate(GenerateRun {
        spec: spec.clone(),
        out: a.out.clone(),
        labels_out: labels_out.clone(),
    });
    let ld = generate(&spec)?;
    write_dataset(&ld.data, &a.out)?;
    write_labels(&ld.labels, &labels_out)?;
    sidecar(&config, &a.out)?;
    sidecar(&config, &labels_out)?;
    println!(
        "wrote {} cases ({} planted anomalies) to {}",
        ld.data.len(),
        ld.anomalies().count(),
        a.out.display()
    );
    Ok(())
}

/// Joins two `case_id`-keyed tables; both must cover exactly the same ids.
fn join<A, B: Copy>(
    left: Vec<(usize, A)>,
    right: Vec<(usize, B)>,
) -> Result<Vec<(usize, A, B)>, CliError> {
    let mut by_id: BTreeMap<usize, B> = BTreeMap::new();
    for (g, v) in right {
        if by_id.insert(g, v).is_some() {
            return Err(CliError::Usage(format!(
                "case_id {g} appears twice in the labels"
            )));
        }
    }
    if left.len() != by_id.len() {
        return Err(CliError::Usage(format!(
            "case ids differ: {} scored cases vs {} labeled cases",
            left.len(),
            by_id.len()
        )));
    }
    let mut joined: Vec<(usize, A, B)> = Vec::with_capacity(left.len());
    for (g, v) in left {
        let b = by_id
            .remove(&g)
            .ok_or_else(|| CliError::Usage(format!("case_id {g} has no label or appears twice")))?;
        joined.push((g, v, b));
    }
    joined.sort_by_key(|j| j.0);
    Ok(joined)
}

#[derive(Serialize)]
struct PartialReport {
    range: PartialRange,
    standardized: bool,
    #[serde(flatten)]
    ci: BootstrapCI,
}

#[derive(Serialize)]
struct MetricsReport {
    config: RunConfig,
    cases: usize,
    anomalies: usize,
    roc_auc: BootstrapCI,
    pr_auc: BootstrapCI,
    pr_interpolation: &'static str,
    partial_auc_specificity: PartialReport,
    partial_auc_sensitivity: PartialReport,
    youden: BestThreshold,
    mcc: BestThreshold,
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let config = RunConfig::Evaluate(EvaluateRun {
        scores: a.scores.clone(),
        labels: a.labels.clone(),
        bootstrap: a.bootstrap,
        level: a.level,
        partial_spec: a.partial_spec,
        partial_sens: a.partial_sens,
        seed: a.seed,
        band_points: a.band_points,
        metrics_out: a.metrics_out.clone(),
        roc_out: a.roc_out.clone(),
        pr_out: a.pr_out.clone(),
        band_out: a.band_out.clone(),
        threads: a.threads,
    });
    if a.band_out.is_some() && a.band_points < 2 {
        return Err(CliError::Usage("--band-points must be at least 2".into()));
    }
    let joined = join(read_scores(&a.scores)?, read_labels(&a.labels)?)?;
    let sl = ScoredLabels::new(
        joined.iter().map(|j| j.1).collect(),
        joined.iter().map(|j| j.2.is_anomaly()).collect(),
    )?;
    let spec_range = PartialRange::Specificity {
        lo: a.partial_spec,
        hi: 1.0,
    };
    let sens_range = PartialRange::Sensitivity {
        lo: a.partial_sens,
        hi: 1.0,
    };
    let stats = [
        Statistic::RocAuc,
        Statistic::PrAuc,
        Statistic::PartialAuc {
            range: spec_range,
            standardized: true,
        },
        Statistic::PartialAuc {
            range: sens_range,
            standardized: true,
        },
    ];

    let (cis, band) = with_pool(a.threads, || -> Result<_, CliError> {
        let cis = bootstrap_many(&sl, &stats, a.bootstrap, a.level, a.seed)?;
        let band = match a.band_out {
            Some(_) => {
                let last = (a.band_points - 1) as f64;
                let grid: Vec<f64> = (0..a.band_points).map(|j| j as f64 / last).collect();
                Some(roc_band(&sl, a.bootstrap, &grid, a.level, a.seed)?)
            }
            None => None,
        };
        Ok((cis, band))
    })??;
    let (roc, _) = roc_auc(&sl)?;
    let (pr, _) = pr_auc(&sl)?;

    let report = MetricsReport {
        config: config.clone(),
        cases: sl.len(),
        anomalies: sl.positives(),
        roc_auc: cis[0],
        pr_auc: cis[1],
        pr_interpolation: PR_INTERPOLATION,
        partial_auc_specificity: PartialReport {
            range: spec_range,
            standardized: true,
            ci: cis[2],
        },
        partial_auc_sensitivity: PartialReport {
            range: sens_range,
            standardized: true,
            ci: cis[3],
        },
        youden: best_threshold(&sl, Criterion::Youden)?,
        mcc: best_threshold(&sl, Criterion::Mcc)?,
    };
    let json = serde_json::to_string_pretty(&report).expect("metrics always serialize") + "\n";
    match &a.metrics_out {
        Some(path) => std::fs::write(path, json).map_err(CliError::io(path))?,
        None => print!("{json}"),
    }
    if let Some(path) = &a.roc_out {
        write_points(roc.points(), path)?;
        sidecar(&config, path)?;
    }
    if let Some(path) = &a.pr_out {
        write_points(pr.points(), path)?;
        sidecar(&config, path)?;
    }
    if let (Some(path), Some(band)) = (&a.band_out, band) {
        write_points(&band, path)?;
        sidecar(&config, path)?;
    }
    Ok(())
}

fn labels_for(data: &Dataset, path: &Path) -> Result<Vec<bool>, CliError> {
    let ids: Vec<(usize, ())> = data.case_ids().map(|g| (g, ())).collect();
    let joined = join(ids, read_labels(path)?)?;
    Ok(joined.iter().map(|j| j.2.is_anomaly()).collect())
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let variants = a
        .variants
        .iter()
        .map(|v| v.parse::<Variant>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    if variants.is_empty() || a.fractions == 0 || a.repeats == 0 {
        return Err(CliError::Usage(
            "--variants, --fractions and --repeats must be non-empty".into(),
        ));
    }
    let missing = missing_tokens(&a.missing_tokens);
    let (source, data, labels) = match (&a.input, &a.kind) {
        (Some(input), None) => {
            let data = load_input(input, a.schema.as_deref(), &missing)?;
            let labels = a
                .labels
                .as_deref()
                .map(|p| labels_for(&data, p))
                .transpose()?;
            let source = BenchSource::File {
                input: input.clone(),
                schema: a.schema.clone(),
                labels: a.labels.clone(),
                missing_tokens: missing,
            };
            (source, data, labels)
        }
        (None, Some(kind)) => {
            let kind: GeneratorKind = kind.parse()?;
            let spec = match a.n {
                Some(n) => GeneratorSpec::new(kind, n, a.seed),
                None => GeneratorSpec::with_defaults(kind, a.seed),
            };
            let ld = generate(&spec)?;
            let labels: Vec<bool> = ld.labels.iter().map(Label::is_anomaly).collect();
            (BenchSource::Synthetic { spec }, ld.data, Some(labels))
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --input and --kind is required".into(),
            ))
        }
    };
    let config = RunConfig::Bench(BenchRun {
        source,
        variants: variants.iter().map(Variant::to_string).collect(),
        fractions: a.fractions,
        repeats: a.repeats,
        subset_seed: a.seed,
        output: a.output.clone(),
        threads: a.threads,
    });

    let report: BenchReport = with_pool(a.threads, || {
        run_bench(
            &data,
            labels.as_deref(),
            &variants,
            a.fractions,
            a.repeats,
            a.seed,
        )
    })??;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &a.output {
        Some(path) => {
            report
                .write_csv(create(path)?)
                .map_err(crate::data::DataError::from)?;
            sidecar(&config, path)?;
        }
        None => {
            report
                .write_csv(&mut out)
                .map_err(crate::data::DataError::from)?;
            writeln!(out).map_err(CliError::io("<stdout>"))?;
        }
    }
    let mut fits = || -> io::Result<()> {
        writeln!(out, "variant,slope,intercept,r_squared")?;
        for &v in &variants {
            let fit = report.fit(v);
            writeln!(out, "{v},{},{},{}", fit.slope, fit.intercept, fit.r_squared)?;
        }
        out.flush()
    };
    fits().map_err(CliError::io("<stdout>"))
}
