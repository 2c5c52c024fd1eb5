use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::transforms::sinh_squared_gain;
use super::{for_each_chunk, sample, splitmix64, DEFAULT_CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::estimators::SpectralEnsemble;
use crate::spec::DistributionSpec;

const SPECKLE_STREAM_TAG: u64 = 0x7370_6563_6b6c_6521;

/// Pump photon number per pulse for the synthetic spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pump {
    /// Drawn from a noise-free law each pulse.
    Law(DistributionSpec),
    /// The same value every pulse.
    Constant(f64),
}

/// Synthetic single-shot spectra on a grid symmetric about its central
/// (pump) bin. Bins `c−i` and `c+i` form a signal/idler pair: both see the
/// same pump value and, with `speckle`, the same unit-mean exponential
/// factor. Bin `j` receives `sinh²(κ_j·N_p)` times that factor.
pub fn synth_spectral_ensemble(
    pump: &Pump,
    wavelengths: &[f64],
    kappa_profile: &[f64],
    speckle: bool,
    pulses: usize,
    seed: u64,
) -> Result<SpectralEnsemble> {
    let bins = wavelengths.len();
    if bins == 0 || bins.is_multiple_of(2) {
        return Err(Error::invalid(
            "wavelengths",
            "need an odd number of bins centred on the pump",
        ));
    }
    if wavelengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "wavelengths",
            "bin centres must increase strictly",
        ));
    }
    let c = bins / 2;
    let span = wavelengths[bins - 1] - wavelengths[0];
    for i in 1..=c {
        let below = wavelengths[c] - wavelengths[c - i];
        let above = wavelengths[c + i] - wavelengths[c];
        if (below - above).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::invalid(
                "wavelengths",
                format!(
                    "grid is not symmetric about the pump bin {}: detunings {below} and {above}",
                    wavelengths[c]
                ),
            ));
        }
    }
    if kappa_profile.len() != bins {
        return Err(Error::invalid(
            "kappa_profile",
            format!("need {bins} values, one per bin"),
        ));
    }
    if kappa_profile.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
        return Err(Error::invalid(
            "kappa_profile",
            "values must be finite and >= 0",
        ));
    }
    if pulses == 0 {
        return Err(Error::invalid("pulses", "must be >= 1"));
    }

    let pump_values = match pump {
        Pump::Law(spec) => {
            if spec.noise_sigma > 0.0 {
                return Err(Error::invalid("pump", "pump law must be noise-free"));
            }
            sample(spec, pulses, seed)?.values
        }
        Pump::Constant(v) => {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "pump",
                    "constant pump must be finite and >= 0",
                ));
            }
            vec![*v; pulses]
        }
    };

    let pairs = c + 1;
    let mut factors = vec![1.0; pulses * pairs];
    if speckle {
        for_each_chunk(
            &mut factors,
            DEFAULT_CHUNK_SIZE,
            splitmix64(seed ^ SPECKLE_STREAM_TAG),
            |rng, chunk| {
                for f in chunk.iter_mut() {
                    *f = Exp1.sample(rng);
                }
                Ok(())
            },
        )?;
    }

    let mut spectra = Vec::with_capacity(pulses);
    for (p, &np) in pump_values.iter().enumerate() {
        let row = (0..bins)
            .map(|j| {
                let pair = j.abs_diff(c);
                Ok(sinh_squared_gain(kappa_profile[j] * np)? * factors[p * pairs + pair])
            })
            .collect::<Result<Vec<f64>>>()?;
        spectra.push(row);
    }
    SpectralEnsemble::new(wavelengths.to_vec(), spectra)
}
