//! `reproduce`: canned pipelines regenerating the published tables.
//!
//! Each table is a shipped TOML file of rows. A row names the source law,
//! the pulse count and seed, optional loss and detector stages, and one
//! check. Checks produce an artifact value that is set beside the theory
//! value, the published value and the acceptance interval.

use std::fmt::Write as _;
use std::path::Path;

use photon_tails::estimators::{
    compare_tail_fits, empirical_ccdf, empirical_gm, fmt17, hazard_curve,
};
use photon_tails::io::to_json;
use photon_tails::sampler::PulseTrain;
use photon_tails::spec::SpecDocument;
use photon_tails::{
    analytic_gm, analytic_tail_exponent, log_ccdf, DistributionSpec, Error, Result,
};
use serde::{Deserialize, Serialize};

use crate::analyze::write_atomic;
use crate::config::{AnalysesDocument, DetectorDocument, RunConfig, RunConfigDocument};

const TABLE1: &str = include_str!("configs/table1.toml");
const TABLE2: &str = include_str!("configs/table2.toml");
const FIG8: &str = include_str!("configs/fig8.toml");

pub const TABLE_IDS: [&str; 3] = ["table1", "table2", "fig8"];

/// Survival band used when scoring an empirical hazard curve.
const HAZARD_BAND: (f64, f64) = (1e-4, 0.9);

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub id: String,
    pub title: String,
    pub rows: Vec<RowDocument>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDocument {
    pub label: String,
    pub check: Check,
    pub spec: SpecDocument,
    pub pulses: u64,
    pub seed: u64,
    #[serde(default)]
    pub loss_eta: Option<f64>,
    #[serde(default)]
    pub detector: Option<DetectorDocument>,
    /// Correlation order for `gm`.
    #[serde(default)]
    pub order: Option<u32>,
    /// Fit window for `tail-fit` and `loss-shift`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub published: Option<f64>,
    #[serde(default)]
    pub note: String,
    pub accept: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Empirical g⁽ᵐ⁾ against the closed form.
    Gm,
    /// Closed-form tail exponent against the published value.
    TailExponent,
    /// Regression fit of the CCDF over `window`.
    TailFit,
    /// |Δk| of the fit with and without the row's loss stage.
    LossShift,
    /// Worst relative gap of the empirical H(N)/N to the closed form.
    Hazard,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub table: String,
    pub row: String,
    pub check: Check,
    pub artifact: f64,
    pub theory: Option<f64>,
    pub published: Option<f64>,
    pub accept_lo: f64,
    pub accept_hi: f64,
    pub pass: bool,
    pub note: String,
}

pub fn table_source(id: &str) -> Result<&'static str> {
    match id {
        "table1" => Ok(TABLE1),
        "table2" => Ok(TABLE2),
        "fig8" => Ok(FIG8),
        other => Err(Error::invalid(
            "table",
            format!(
                "unknown table \"{other}\" (expected one of {})",
                TABLE_IDS.join(", ")
            ),
        )),
    }
}

pub fn parse_table(text: &str) -> Result<TableDocument> {
    let t: TableDocument =
        toml::from_str(text).map_err(|e| Error::invalid("table", e.message().to_string()))?;
    for row in &t.rows {
        row.validate()?;
    }
    Ok(t)
}

impl RowDocument {
    fn field(&self, name: &str) -> String {
        format!("rows[{}].{name}", self.label)
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.accept;
        if !(lo <= hi) {
            return Err(Error::invalid(self.field("accept"), "need lo <= hi"));
        }
        match self.check {
            Check::Gm if self.order.is_none() => {
                return Err(Error::invalid(self.field("order"), "required for gm"))
            }
            Check::TailFit | Check::LossShift if self.window.is_none() => {
                return Err(Error::invalid(
                    self.field("window"),
                    "required for tail fits",
                ))
            }
            Check::LossShift if self.loss_eta.is_none() => {
                return Err(Error::invalid(
                    self.field("loss_eta"),
                    "required for loss-shift",
                ))
            }
            _ => {}
        }
        if let Some([a, b]) = self.window {
            if !(a > 0.0 && b > a) {
                return Err(Error::invalid(self.field("window"), "need 0 < lo < hi"));
            }
        }
        self.config(None, self.loss_eta).map(|_| ())
    }

    fn config(&self, pulses: Option<u64>, loss_eta: Option<f64>) -> Result<RunConfig> {
        RunConfigDocument {
            spec: self.spec.clone(),
            pulses: pulses.unwrap_or(self.pulses),
            master_seed: self.seed,
            loss_eta,
            detector: self.detector,
            stages: Vec::new(),
            analyses: AnalysesDocument::default(),
        }
        .into_config()
    }
}

fn fitted_k(train: &PulseTrain, [lo, hi]: [f64; 2]) -> Result<f64> {
    Ok(compare_tail_fits(&empirical_ccdf(train)?, lo, hi)?
        .regression
        .k)
}

/// Empirical and closed-form H(N)/N on the sampled grid.
#[derive(Clone, Debug, Serialize)]
pub struct HazardRow {
    pub n: f64,
    pub survival: f64,
    pub h_over_n: f64,
    pub h_over_n_theory: f64,
}

fn hazard_rows(train: &PulseTrain, spec: &DistributionSpec) -> Result<Vec<HazardRow>> {
    hazard_curve(train)?
        .into_iter()
        .map(|p| {
            Ok(HazardRow {
                n: p.n,
                survival: p.survival,
                h_over_n: p.h_over_n,
                h_over_n_theory: -log_ccdf(spec, p.n)? / p.n,
            })
        })
        .collect()
}

pub struct TableRun {
    pub rows: Vec<Comparison>,
    /// (row label, curve) for hazard checks
    pub curves: Vec<(String, Vec<HazardRow>)>,
}

pub fn run_table(table: &TableDocument, pulses: Option<u64>) -> Result<TableRun> {
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for row in &table.rows {
        let config = row.config(pulses, row.loss_eta)?;
        let spec = config.spec.noise_free();
        let (artifact, theory) = match row.check {
            Check::Gm => {
                let m = row.order.unwrap_or(2);
                let train = config.run()?;
                (empirical_gm(&train, m)?.value, Some(analytic_gm(&spec, m)?))
            }
            Check::TailExponent => {
                let k = analytic_tail_exponent(&spec).ok_or_else(|| {
                    Error::Unsupported(format!("{}: law has no power-law tail", row.label))
                })?;
                (k, Some(k))
            }
            Check::TailFit => {
                let train = config.run()?;
                (
                    fitted_k(&train, row.window.unwrap())?,
                    analytic_tail_exponent(&spec),
                )
            }
            Check::LossShift => {
                let window = row.window.unwrap();
                let lossless = row.config(pulses, None)?.run()?;
                let lossy = config.run()?;
                let dk = (fitted_k(&lossy, window)? - fitted_k(&lossless, window)?).abs();
                (dk, Some(0.0))
            }
            Check::Hazard => {
                let train = config.run()?;
                let curve = hazard_rows(&train, &spec)?;
                let gaps: Vec<f64> = curve
                    .iter()
                    .filter(|p| p.survival >= HAZARD_BAND.0 && p.survival <= HAZARD_BAND.1)
                    .map(|p| (p.h_over_n / p.h_over_n_theory - 1.0).abs())
                    .collect();
                if gaps.is_empty() {
                    return Err(Error::InsufficientData(format!(
                        "{}: no hazard points with survival in [{}, {}]",
                        row.label, HAZARD_BAND.0, HAZARD_BAND.1
                    )));
                }
                let worst = gaps.iter().copied().fold(0.0, f64::max);
                curves.push((row.label.clone(), curve));
                (worst, Some(0.0))
            }
        };
        let [lo, hi] = row.accept;
        rows.push(Comparison {
            table: table.id.clone(),
            row: row.label.clone(),
            check: row.check,
            artifact,
            theory,
            published: row.published,
            accept_lo: lo,
            accept_hi: hi,
            pass: artifact >= lo && artifact <= hi,
            note: row.note.clone(),
        });
    }
    Ok(TableRun { rows, curves })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check_name(c: Check) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn to_csv(rows: &[Comparison]) -> String {
    let mut s =
        String::from("table,row,check,artifact,theory,published,accept_lo,accept_hi,pass,note\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.table,
            csv_field(&r.row),
            check_name(r.check),
            fmt17(r.artifact),
            opt(r.theory),
            opt(r.published),
            fmt17(r.accept_lo),
            fmt17(r.accept_hi),
            r.pass,
            csv_field(&r.note)
        );
    }
    s
}

pub fn to_ndjson(rows: &[Comparison]) -> Result<String> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&to_json(r)?);
        s.push('\n');
    }
    Ok(s)
}

/// Human-readable table for the terminal.
pub fn render(title: &str, rows: &[Comparison]) -> String {
    let num = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let width = rows.iter().map(|r| r.row.len()).max().unwrap_or(3).max(3);
    let mut s = format!("{title}\n");
    let _ = writeln!(
        s,
        "{:<width$}  {:<13}  {:>10}  {:>10}  {:>10}  {:>21}  result",
        "row", "check", "artifact", "theory", "published", "accept"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:<13}  {:>10}  {:>10}  {:>10}  {:>21}  {}",
            r.row,
            check_name(r.check),
            num(Some(r.artifact)),
            num(r.theory),
            num(r.published),
            format!("[{:.4}, {:.4}]", r.accept_lo, r.accept_hi),
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let notes: Vec<_> = rows.iter().filter(|r| !r.note.is_empty()).collect();
    for r in notes {
        let _ = writeln!(s, "  {}: {}", r.row, r.note);
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let _ = writeln!(s, "{passed}/{} rows pass", rows.len());
    s
}

fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Runs a table and writes `<id>.csv`, `<id>.ndjson` and, for hazard rows,
/// `<id>.<row>.csv` curves into `dir`. Returns the terminal rendering.
pub fn reproduce(id: &str, dir: &Path, pulses: Option<u64>) -> Result<String> {
    let table = parse_table(table_source(id)?)?;
    if pulses == Some(0) {
        return Err(Error::invalid("pulses", "must be >= 1"));
    }
    std::fs::create_dir_all(dir)?;
    let run = run_table(&table, pulses)?;
    for (label, curve) in &run.curves {
        let mut s = String::from("n,survival,h_over_n,h_over_n_theory\n");
        for p in curve {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt17(p.n),
                fmt17(p.survival),
                fmt17(p.h_over_n),
                fmt17(p.h_over_n_theory)
            );
        }
        write_atomic(&dir.join(format!("{}.{}.csv", table.id, slug(label))), &s)?;
    }
    write_atomic(&dir.join(format!("{}.csv", table.id)), &to_csv(&run.rows))?;
    write_atomic(
        &dir.join(format!("{}.ndjson", table.id)),
        &to_ndjson(&run.rows)?,
    )?;
    Ok(render(&table.title, &run.rows))
}
