use serde::{Deserialize, Serialize};

use super::ccdf::EmpiricalCcdf;
use crate::error::{Error, Result};
use crate::sampler::{DetectorModel, PulseTrain};

pub const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFitMethod {
    CcdfRegression,
    Hill,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFitReport {
    pub k: f64,
    pub k_stderr: f64,
    pub fit_lo: f64,
    pub fit_hi: f64,
    pub points_used: usize,
    /// Coefficient of determination; 1 for Hill fits.
    pub r_squared: f64,
    pub method: TailFitMethod,
}

/// Pareto exponent of the tail inside `[fit_lo, fit_hi]`.
///
/// `CcdfRegression`: ordinary least squares of ln C̄ on ln N over the distinct
/// sample values inside the window with C̄ > 0; k is minus the slope and the
/// stderr is the textbook slope error. Consecutive C̄ values share most of
/// their counts, so that stderr understates the sampling spread.
///
/// `Hill`: maximum-likelihood Pareto exponent of the values above `fit_lo`,
/// with values above `fit_hi` treated as right-censored at `fit_hi` (which
/// keeps saturated pulses from biasing it). Without censored values this is
/// the Hill estimator at threshold `fit_lo`; stderr is k/√(uncensored count).
pub fn fit_tail_exponent(
    ccdf: &EmpiricalCcdf,
    fit_lo: f64,
    fit_hi: f64,
    method: TailFitMethod,
) -> Result<TailFitReport> {
    if !(fit_lo > 0.0 && fit_hi > fit_lo && fit_hi.is_finite()) {
        return Err(Error::invalid(
            "fit window",
            format!("need 0 < fit_lo < fit_hi, got [{fit_lo}, {fit_hi}]"),
        ));
    }
    let points: Vec<_> = ccdf
        .points()
        .into_iter()
        .filter(|p| p.value >= fit_lo && p.value <= fit_hi)
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} distinct values in [{fit_lo}, {fit_hi}], need >= {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    if points.iter().all(|p| p.survival == 0.0) {
        return Err(Error::InsufficientData(format!(
            "zero survival inside [{fit_lo}, {fit_hi}]"
        )));
    }
    match method {
        TailFitMethod::CcdfRegression => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = points
                .iter()
                .filter(|p| p.survival > 0.0)
                .map(|p| (p.value.ln(), p.survival.ln()))
                .unzip();
            let n = xs.len();
            if n < MIN_FIT_POINTS {
                return Err(Error::InsufficientData(format!(
                    "{n} values with positive survival in [{fit_lo}, {fit_hi}], need >= {MIN_FIT_POINTS}"
                )));
            }
            let mx = xs.iter().sum::<f64>() / n as f64;
            let my = ys.iter().sum::<f64>() / n as f64;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            let slope = sxy / sxx;
            let sse: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
                .sum();
            let k = -slope;
            if !(k > 0.0) {
                return Err(Error::InsufficientData(format!(
                    "CCDF does not decrease inside [{fit_lo}, {fit_hi}] (slope {slope})"
                )));
            }
            Ok(TailFitReport {
                k,
                k_stderr: (sse / (n - 2) as f64 / sxx).sqrt(),
                fit_lo,
                fit_hi,
                points_used: n,
                r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
                method,
            })
        }
        TailFitMethod::Hill => {
            let sorted = ccdf.sorted();
            let start = sorted.partition_point(|&v| v <= fit_lo);
            let (mut log_sum, mut inside, mut censored) = (0.0, 0usize, 0usize);
            for &v in &sorted[start..] {
                if v <= fit_hi {
                    log_sum += (v / fit_lo).ln();
                    inside += 1;
                } else {
                    censored += 1;
                }
            }
            let exposure = log_sum + censored as f64 * (fit_hi / fit_lo).ln();
            let k = inside as f64 / exposure;
            Ok(TailFitReport {
                k,
                k_stderr: k / (inside as f64).sqrt(),
                fit_lo,
                fit_hi,
                points_used: inside,
                r_squared: 1.0,
                method,
            })
        }
    }
}

/// Both estimators on one window and their disagreement in joint stderr.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFitComparison {
    pub regression: TailFitReport,
    pub hill: TailFitReport,
    /// |k_regression − k_hill| / √(stderr_r² + stderr_h²)
    pub disagreement: f64,
    /// Disagreement above 3: the window is not Pareto-like.
    pub non_pareto: bool,
}

pub fn compare_tail_fits(
    ccdf: &EmpiricalCcdf,
    fit_lo: f64,
    fit_hi: f64,
) -> Result<TailFitComparison> {
    let regression = fit_tail_exponent(ccdf, fit_lo, fit_hi, TailFitMethod::CcdfRegression)?;
    let hill = fit_tail_exponent(ccdf, fit_lo, fit_hi, TailFitMethod::Hill)?;
    let joint = regression.k_stderr.hypot(hill.k_stderr);
    let disagreement = (regression.k - hill.k).abs() / joint;
    Ok(TailFitComparison {
        regression,
        hill,
        disagreement,
        non_pareto: disagreement > 3.0,
    })
}

/// `[1.5·mean, 0.8·saturation]` when the detector saturates, otherwise the
/// central two decades (in log scale) of the positive values.
pub fn default_fit_window(
    train: &PulseTrain,
    detector: Option<&DetectorModel>,
) -> Result<(f64, f64)> {
    let positive = train.values.iter().copied().filter(|&v| v > 0.0);
    let (min, max) = positive.fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    if max <= min {
        return Err(Error::InsufficientData(
            "fewer than two distinct positive values".into(),
        ));
    }
    if let Some(sat) = detector.and_then(|d| d.saturation) {
        let lo = 1.5 * train.mean();
        let hi = 0.8 * sat;
        if lo > 0.0 && hi > lo {
            return Ok((lo, hi));
        }
        return Err(Error::invalid(
            "fit window",
            format!("1.5·mean = {lo} is not below 0.8·saturation = {hi}"),
        ));
    }
    let (a, b) = (min.log10(), max.log10());
    if b - a <= 2.0 {
        return Ok((min, max));
    }
    let c = 0.5 * (a + b);
    Ok((10f64.powf(c - 1.0), 10f64.powf(c + 1.0)))
}
