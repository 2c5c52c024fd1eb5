use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PulseTrain;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Binning {
    Linear { width: f64 },
    Logarithmic { bins_per_decade: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub binning: Binning,
    pub lo: f64,
    pub hi: f64,
}

impl HistogramSpec {
    pub fn linear(lo: f64, hi: f64, width: f64) -> Self {
        HistogramSpec {
            binning: Binning::Linear { width },
            lo,
            hi,
        }
    }

    pub fn logarithmic(lo: f64, hi: f64, bins_per_decade: u32) -> Self {
        HistogramSpec {
            binning: Binning::Logarithmic { bins_per_decade },
            lo,
            hi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo) {
            return Err(Error::invalid("histogram.range", "need finite lo < hi"));
        }
        match self.binning {
            Binning::Linear { width } if !(width > 0.0 && width.is_finite()) => {
                Err(Error::invalid("histogram.width", "must be finite and > 0"))
            }
            Binning::Logarithmic { bins_per_decade: 0 } => {
                Err(Error::invalid("histogram.bins_per_decade", "must be >= 1"))
            }
            Binning::Logarithmic { .. } if self.lo <= 0.0 => Err(Error::invalid(
                "histogram.range",
                "logarithmic bins need lo > 0",
            )),
            _ => Ok(()),
        }
    }

    /// Bin edges; the last bin is cut at `hi`.
    pub fn edges(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut edges = vec![self.lo];
        match self.binning {
            Binning::Linear { width } => {
                let count = ((self.hi - self.lo) / width).ceil() as usize;
                edges.extend((1..count).map(|i| self.lo + width * i as f64));
            }
            Binning::Logarithmic { bins_per_decade } => {
                let decades = (self.hi / self.lo).log10();
                let count = (decades * f64::from(bins_per_decade) - 1e-9).ceil() as usize;
                let step = 1.0 / f64::from(bins_per_decade);
                edges.extend((1..count).map(|i| self.lo * 10f64.powf(step * i as f64)));
            }
        }
        if edges.len() > 10_000_000 {
            return Err(Error::invalid("histogram", "more than 10^7 bins"));
        }
        edges.push(self.hi);
        Ok(edges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// count / (pulses · width)
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<Bin>,
    pub pulses: u64,
    pub below: u64,
    pub above: u64,
}

/// Counts pulses in half-open bins `[lo, hi)`; the last bin also takes `hi`.
pub fn empirical_histogram(train: &PulseTrain, spec: &HistogramSpec) -> Result<Histogram> {
    let edges = spec.edges()?;
    if train.is_empty() {
        return Err(Error::InsufficientData("empty train".into()));
    }
    let mut counts = vec![0u64; edges.len() - 1];
    let (mut below, mut above) = (0, 0);
    for &v in &train.values {
        if v < spec.lo {
            below += 1;
        } else if v > spec.hi {
            above += 1;
        } else {
            let i = edges.partition_point(|&e| e <= v).clamp(1, counts.len());
            counts[i - 1] += 1;
        }
    }
    let pulses = train.len() as u64;
    if below + above == pulses {
        return Err(Error::InsufficientData(format!(
            "histogram range [{}, {}] holds none of the {pulses} values",
            spec.lo, spec.hi
        )));
    }
    let bins = edges
        .windows(2)
        .zip(counts)
        .map(|(e, count)| Bin {
            lo: e[0],
            hi: e[1],
            count,
            density: count as f64 / (pulses as f64 * (e[1] - e[0])),
        })
        .collect();
    Ok(Histogram {
        bins,
        pulses,
        below,
        above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        let t = PulseTrain::from_values(vec![5.0]);
        let h = empirical_histogram(&t, &HistogramSpec::linear(0.0, 10.0, 10.0)).unwrap();
        assert_eq!(h.bins.len(), 1);
        assert_eq!(h.bins[0].count, 1);
        assert!((h.bins[0].density - 0.1).abs() < 1e-15);
    }

    #[test]
    fn negative_range_and_overflow_counts() {
        let t = PulseTrain::from_values(vec![-3.0, -0.5, 0.5, 20.0]);
        let h = empirical_histogram(&t, &HistogramSpec::linear(-4.0, 4.0, 1.0)).unwrap();
        assert_eq!(h.bins.len(), 8);
        assert_eq!(h.bins[0].lo, -4.0);
        assert_eq!(h.bins[1].count, 1);
        assert_eq!(h.above, 1);
        assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), 3);
    }

    #[test]
    fn log_edges() {
        let e = HistogramSpec::logarithmic(1.0, 1000.0, 2).edges().unwrap();
        assert_eq!(e.len(), 7);
        assert!((e[2] - 10.0).abs() < 1e-12);
        assert!(HistogramSpec::logarithmic(0.0, 10.0, 2).edges().is_err());
    }

    #[test]
    fn disjoint_range_is_an_error() {
        let t = PulseTrain::from_values(vec![1.0, 2.0]);
        assert!(empirical_histogram(&t, &HistogramSpec::linear(10.0, 20.0, 1.0)).is_err());
    }
}
