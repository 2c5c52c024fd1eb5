use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PulseTrain;

/// Right-continuous step survival function C̄(v) = #{values > v} / n.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCcdf {
    sorted: Vec<f64>,
}

/// One step of the CCDF: survival just at and after `value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub value: f64,
    pub survival: f64,
}

impl EmpiricalCcdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData(
                "empirical CCDF of an empty train".into(),
            ));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("values", "NaN in train"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalCcdf { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of values strictly above `v`.
    pub fn count_above(&self, v: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x <= v)
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.count_above(v) as f64 / self.sorted.len() as f64
    }

    /// Distinct values with their survival, ascending.
    pub fn points(&self) -> Vec<CcdfPoint> {
        let n = self.sorted.len() as f64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i + 1;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            out.push(CcdfPoint {
                value: v,
                survival: (self.sorted.len() - j) as f64 / n,
            });
            i = j;
        }
        out
    }

    /// At most `max_points` steps, log-spaced in survival, for plotting.
    pub fn thinned(&self, max_points: usize) -> Vec<CcdfPoint> {
        let n = self.sorted.len();
        if n <= max_points {
            return self.points();
        }
        let mut idx: Vec<usize> = (0..max_points)
            .map(|i| {
                let frac = (n as f64).powf(-(i as f64) / (max_points - 1) as f64);
                (n as f64 * (1.0 - frac)).round() as usize
            })
            .map(|i| i.min(n - 1))
            .collect();
        idx.dedup();
        idx.into_iter()
            .map(|i| {
                let v = self.sorted[i];
                CcdfPoint {
                    value: v,
                    survival: self.eval(v),
                }
            })
            .collect()
    }
}

pub fn empirical_ccdf(train: &PulseTrain) -> Result<EmpiricalCcdf> {
    EmpiricalCcdf::new(train.values.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardPoint {
    pub n: f64,
    pub survival: f64,
    /// H(N)/N with H = −ln C̄.
    pub h_over_n: f64,
}

pub const HAZARD_POINTS_PER_DECADE: u32 = 20;

pub fn hazard_curve(train: &PulseTrain) -> Result<Vec<HazardPoint>> {
    hazard_curve_with(train, HAZARD_POINTS_PER_DECADE)
}

/// H(N)/N on a log grid from the 10th smallest positive value to the 10th
/// largest value, keeping only points with survival ≥ 10/n.
pub fn hazard_curve_with(train: &PulseTrain, points_per_decade: u32) -> Result<Vec<HazardPoint>> {
    if train.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "hazard curve needs >= 1000 pulses, got {}",
            train.len()
        )));
    }
    if points_per_decade == 0 {
        return Err(Error::invalid("points_per_decade", "must be >= 1"));
    }
    let ccdf = empirical_ccdf(train)?;
    let sorted = ccdf.sorted();
    let positive = &sorted[sorted.partition_point(|&v| v <= 0.0)..];
    if positive.len() < 20 {
        return Ok(Vec::new());
    }
    let lo = positive[9];
    let hi = sorted[sorted.len() - 10];
    let floor = 10.0 / train.len() as f64;
    let steps = ((hi / lo).log10() * f64::from(points_per_decade)).ceil() as usize;
    let out = (0..=steps)
        .map(|i| lo * 10f64.powf(i as f64 / f64::from(points_per_decade)))
        .filter_map(|n| {
            let survival = ccdf.eval(n);
            (survival >= floor).then(|| HazardPoint {
                n,
                survival,
                h_over_n: -survival.ln() / n,
            })
        })
        .collect();
    Ok(out)
}
