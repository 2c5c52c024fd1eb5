use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{for_each_chunk, PulseTrain, SampleOptions, TransformRecord};
use crate::distributions::MAX_GAIN;
use crate::error::{Error, Result};

/// Additive Gaussian noise followed by an optional hard saturation clamp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub noise_sigma: f64,
    pub saturation: Option<f64>,
}

impl DetectorModel {
    pub fn new(noise_sigma: f64, saturation: Option<f64>) -> Result<Self> {
        let model = DetectorModel {
            noise_sigma,
            saturation,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(
                "detector.noise_sigma",
                "must be finite and >= 0",
            ));
        }
        if let Some(s) = self.saturation {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(
                    "detector.saturation",
                    "must be finite and > 0",
                ));
            }
            if s <= self.noise_sigma {
                return Err(Error::invalid(
                    "detector.saturation",
                    "must exceed noise_sigma",
                ));
            }
        }
        Ok(())
    }
}

pub(crate) fn sinh_squared_gain(gain: f64) -> Result<f64> {
    if gain > MAX_GAIN {
        return Err(Error::Range(format!(
            "FWM gain {gain} exceeds {MAX_GAIN}; sinh² would overflow"
        )));
    }
    Ok(gain.sinh().powi(2))
}

fn with_record(train: &PulseTrain, record: TransformRecord) -> Result<PulseTrain> {
    let mut out = PulseTrain {
        values: Vec::new(),
        meta: train.meta.clone(),
    };
    out.push_transform(record)?;
    Ok(out)
}

/// N ↦ K·Nⁿ.
pub fn harmonic_transform(train: &PulseTrain, order: u32, conversion: f64) -> Result<PulseTrain> {
    if order < 2 {
        return Err(Error::invalid("order", "harmonic order must be >= 2"));
    }
    if !(conversion > 0.0 && conversion.is_finite()) {
        return Err(Error::invalid("conversion", "must be finite and > 0"));
    }
    let mut out = with_record(train, TransformRecord::Harmonic { order, conversion })?;
    out.values = train
        .values
        .par_iter()
        .map(|&n| {
            let v = conversion * n.powi(order as i32);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Range(format!("harmonic of {n} overflows")))
            }
        })
        .collect::<Result<_>>()?;
    Ok(out)
}

/// N_p ↦ sinh²(κ·N_p).
pub fn fwm_transform(pump: &PulseTrain, kappa: f64) -> Result<PulseTrain> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa", "must be finite and > 0"));
    }
    let mut out = with_record(pump, TransformRecord::Fwm { kappa })?;
    out.values = pump
        .values
        .par_iter()
        .map(|&n| {
            if n < 0.0 {
                return Err(Error::invalid("pump", format!("negative pump value {n}")));
            }
            sinh_squared_gain(kappa * n)
        })
        .collect::<Result<_>>()?;
    Ok(out)
}

/// Deterministic attenuation N ↦ η·N.
pub fn apply_loss(train: &PulseTrain, eta: f64) -> Result<PulseTrain> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(
            "eta",
            format!("transmission must lie in (0, 1], got {eta}"),
        ));
    }
    let mut out = with_record(train, TransformRecord::Loss { eta })?;
    out.values = train.values.par_iter().map(|&n| eta * n).collect();
    Ok(out)
}

/// Adds Normal(0, σ²) noise drawn from chunk substreams of `noise_seed`,
/// then clamps at the saturation level.
pub fn apply_detector(
    train: &PulseTrain,
    model: &DetectorModel,
    noise_seed: u64,
) -> Result<PulseTrain> {
    model.validate()?;
    let mut out = with_record(
        train,
        TransformRecord::Detector {
            noise_sigma: model.noise_sigma,
            saturation: model.saturation,
            noise_seed,
        },
    )?;
    out.values = train.values.clone();
    let options = SampleOptions {
        chunk_size: train.meta.chunk_size as usize,
        threads: None,
    };
    add_noise(
        &mut out.values,
        model.noise_sigma,
        model.saturation,
        noise_seed,
        &options,
    )?;
    Ok(out)
}

pub(crate) fn add_noise(
    values: &mut [f64],
    sigma: f64,
    saturation: Option<f64>,
    seed: u64,
    options: &SampleOptions,
) -> Result<()> {
    if sigma > 0.0 {
        let normal =
            Normal::new(0.0, sigma).map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
        options.run(|| {
            for_each_chunk(values, options.chunk_size.max(1), seed, |rng, chunk| {
                for v in chunk.iter_mut() {
                    *v += normal.sample(rng);
                }
                Ok(())
            })
        })??;
    }
    if let Some(cap) = saturation {
        values.par_iter_mut().for_each(|v| *v = v.min(cap));
    }
    Ok(())
}
