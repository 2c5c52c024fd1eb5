//! `analyze`: estimator report for a saved pulse train.
//!
//! The report is NDJSON: a `meta` record, then one typed record per
//! requested analysis. An analysis that fails becomes an `error` record and
//! the others still run. Plot-ready two-column CSVs are written beside the
//! report as `<stem>.<analysis>.csv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use photon_tails::estimators::{
    compare_tail_fits, default_fit_window, empirical_ccdf, empirical_gm, empirical_histogram,
    fit_tail_exponent, fmt17, hazard_curve, ks_distance, Binning, TailFitReport,
};
use photon_tails::io::to_json;
use photon_tails::sampler::{DetectorModel, PulseTrain, TransformRecord};
use photon_tails::{analytic_gm, analytic_tail_exponent, DistributionSpec, Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Analyses, RunConfig, TailFitChoice};

/// Maximum number of CCDF points kept in the report.
pub const CCDF_POINTS: usize = 2000;

pub struct Report {
    pub lines: Vec<String>,
    /// (suffix, csv body)
    pub csvs: Vec<(&'static str, String)>,
}

fn record<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let mut v = serde_json::to_value(body).map_err(|e| Error::Format(e.to_string()))?;
    let mut obj = serde_json::Map::new();
    obj.insert("type".into(), kind.into());
    match v.take() {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("value".into(), other);
        }
    }
    to_json(&Value::Object(obj))
}

fn error_record(analysis: &str, e: &Error) -> Result<String> {
    record(
        "error",
        &json!({ "analysis": analysis, "kind": e.kind(), "message": e.to_string() }),
    )
}

fn csv(header: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = format!("{header}\n");
    for (a, b) in rows {
        let _ = writeln!(s, "{},{}", fmt17(a), fmt17(b));
    }
    s
}

/// The law the train was drawn from, when no stage has altered it since.
fn reference_spec(train: &PulseTrain, config: &RunConfig) -> Result<Option<DistributionSpec>> {
    if !train.meta.transforms.is_empty() {
        return Ok(None);
    }
    Ok(train.spec()?.or(Some(config.spec)))
}

pub fn build_report(train: &PulseTrain, config: &RunConfig) -> Result<Report> {
    let a: &Analyses = &config.analyses;
    let mut lines = Vec::new();
    let mut csvs = Vec::new();
    let reference = reference_spec(train, config)?;

    lines.push(record(
        "meta",
        &json!({
            "pulses": train.len(),
            "master_seed": train.meta.master_seed,
            "chunk_size": train.meta.chunk_size,
            "spec": train.meta.spec,
            "transforms": train.meta.transforms,
            "summary": train.summary(),
        }),
    )?);

    if let Some(h) = &a.histogram {
        let spec = h.resolve(train);
        match empirical_histogram(train, &spec) {
            Ok(hist) => {
                lines.push(record(
                    "histogram",
                    &json!({ "spec": spec, "histogram": hist }),
                )?);
                let center = |lo: f64, hi: f64| match spec.binning {
                    Binning::Linear { .. } => 0.5 * (lo + hi),
                    Binning::Logarithmic { .. } => (lo * hi).sqrt(),
                };
                csvs.push((
                    "histogram",
                    csv(
                        "center,density",
                        hist.bins.iter().map(|b| (center(b.lo, b.hi), b.density)),
                    ),
                ));
            }
            Err(e) => lines.push(error_record("histogram", &e)?),
        }
    }

    if a.ccdf {
        match empirical_ccdf(train) {
            Ok(c) => {
                let points = c.thinned(CCDF_POINTS);
                lines.push(record("ccdf", &json!({ "points": points }))?);
                csvs.push((
                    "ccdf",
                    csv(
                        "value,survival",
                        points.iter().map(|p| (p.value, p.survival)),
                    ),
                ));
            }
            Err(e) => lines.push(error_record("ccdf", &e)?),
        }
    }

    let mut gm_rows = Vec::new();
    for &m in &a.gm {
        match empirical_gm(train, m) {
            Ok(g) => {
                let theory = reference.as_ref().and_then(|s| analytic_gm(s, m).ok());
                lines.push(record("gm", &json!({ "estimate": g, "theory": theory }))?);
                gm_rows.push((f64::from(m), g.value));
            }
            Err(e) => lines.push(error_record(&format!("gm[{m}]"), &e)?),
        }
    }
    if !gm_rows.is_empty() {
        csvs.push(("gm", csv("m,value", gm_rows.into_iter())));
    }

    if let Some((choice, window)) = a.tailfit {
        match tailfit_records(train, config, choice, window) {
            Ok(mut r) => lines.append(&mut r),
            Err(e) => lines.push(error_record("tailfit", &e)?),
        }
    }

    if a.hazard {
        match hazard_curve(train) {
            Ok(points) => {
                lines.push(record("hazard", &json!({ "points": points }))?);
                csvs.push((
                    "hazard",
                    csv("n,h_over_n", points.iter().map(|p| (p.n, p.h_over_n))),
                ));
            }
            Err(e) => lines.push(error_record("hazard", &e)?),
        }
    }

    if a.ks {
        let result = match &reference {
            Some(spec) => ks_distance(train, spec),
            None => Err(Error::Unsupported(
                "ks needs an untransformed train; the recorded stages change the law".into(),
            )),
        };
        match result {
            Ok(k) => lines.push(record("ks", &k)?),
            Err(e) => lines.push(error_record("ks", &e)?),
        }
    }

    Ok(Report { lines, csvs })
}

fn detector_of(train: &PulseTrain) -> Option<DetectorModel> {
    train.meta.transforms.iter().find_map(|t| match *t {
        TransformRecord::Detector {
            noise_sigma,
            saturation,
            ..
        } => Some(DetectorModel {
            noise_sigma,
            saturation,
        }),
        _ => None,
    })
}

fn tailfit_records(
    train: &PulseTrain,
    config: &RunConfig,
    choice: TailFitChoice,
    window: Option<(f64, f64)>,
) -> Result<Vec<String>> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => default_fit_window(train, detector_of(train).or(config.detector()).as_ref())?,
    };
    let ccdf = empirical_ccdf(train)?;
    let theory = train.spec()?.as_ref().and_then(analytic_tail_exponent);
    let fit = |r: &TailFitReport| record("tailfit", &json!({ "fit": r, "k_theory": theory }));
    if choice == TailFitChoice::Both {
        let c = compare_tail_fits(&ccdf, lo, hi)?;
        return Ok(vec![
            fit(&c.regression)?,
            fit(&c.hill)?,
            record(
                "tailfit-comparison",
                &json!({ "disagreement": c.disagreement, "non_pareto": c.non_pareto }),
            )?,
        ]);
    }
    choice
        .methods()
        .into_iter()
        .map(|m| fit(&fit_tail_exponent(&ccdf, lo, hi, m)?))
        .collect()
}

/// `report.ndjson` → `report.<suffix>.csv` in the same directory.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

pub fn write_report(report: &Report, out: &Path) -> Result<()> {
    let mut body = report.lines.join("\n");
    body.push('\n');
    for (suffix, text) in &report.csvs {
        write_atomic(&sidecar(out, suffix), text)?;
    }
    write_atomic(out, &body)
}
