use serde::{Deserialize, Serialize};

use crate::distributions::Law;
use crate::error::{Error, Result};
use crate::noise::{convolve_with_noise, noise_grid};
use crate::sampler::PulseTrain;
use crate::spec::DistributionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov probability of a distance at least this large.
    pub p_bound: f64,
    pub pulses: u64,
}

/// Sup distance between the empirical CDF of `train` and the CDF of `spec`.
/// Noisy specs are compared against their tabulated noise convolution.
pub fn ks_distance(train: &PulseTrain, spec: &DistributionSpec) -> Result<KsResult> {
    if train.is_empty() {
        return Err(Error::InsufficientData(
            "KS distance of an empty train".into(),
        ));
    }
    spec.validate()?;
    let mut sorted = train.values.clone();
    if sorted.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("train", "NaN in train"));
    }
    sorted.sort_unstable_by(f64::total_cmp);
    let statistic = if spec.noise_sigma > 0.0 {
        let grid = noise_grid(spec, spec.noise_sigma)?;
        let table = convolve_with_noise(spec, spec.noise_sigma, &grid)?;
        let cdf = table.cdf_table();
        sup_distance(&sorted, |x| cdf.eval(x))
    } else {
        let law = Law::of(spec)?;
        sup_distance(&sorted, |x| if x <= 0.0 { 0.0 } else { law.cdf(x) })
    };
    let n = sorted.len() as f64;
    let root = n.sqrt();
    Ok(KsResult {
        statistic,
        p_bound: kolmogorov_q((root + 0.12 + 0.11 / root) * statistic),
        pulses: sorted.len() as u64,
    })
}

fn sup_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let f = cdf(v);
        d = d
            .max((f - i as f64 / n).abs())
            .max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// Q(λ) = 2 Σ (−1)^{j−1} exp(−2j²λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
