//! Deterministic chunk-parallel Monte Carlo pulse trains.
//!
//! A train of `pulses` values is cut into chunks of `chunk_size` pulses.
//! Chunk `c` draws from its own ChaCha8 stream seeded with
//! [`substream_seed`]`(master_seed, c)`, so the output depends only on
//! `(spec, pulses, master_seed, chunk_size)` and never on how many worker
//! threads ran the chunks. Chunks are concatenated in index order.

mod spectral;
mod train;
mod transforms;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spec::{DistributionSpec, PumpFamily, Source};

pub use spectral::{synth_spectral_ensemble, Pump};
pub use train::{PulseTrain, Summary, TrainMeta, TransformRecord};
pub use transforms::{
    apply_detector, apply_loss, fwm_transform, harmonic_transform, DetectorModel,
};

pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Tag mixed into the master seed for the noise stage of noisy specs.
const NOISE_STREAM_TAG: u64 = 0x6e6f_6973_655f_7374;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of chunk `chunk_index`: `splitmix64(master_seed ^ splitmix64(chunk_index))`.
pub fn substream_seed(master_seed: u64, chunk_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(chunk_index))
}

pub(crate) fn chunk_rng(master_seed: u64, chunk_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master_seed, chunk_index))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleOptions {
    pub chunk_size: usize,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            chunk_size: DEFAULT_CHUNK_SIZE,
            threads: None,
        }
    }
}

impl SampleOptions {
    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(job()),
            Some(0) => Err(Error::invalid("threads", "must be >= 1")),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Range(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Run `fill` over each chunk of `out` with that chunk's RNG stream.
pub(crate) fn for_each_chunk<F>(
    out: &mut [f64],
    chunk_size: usize,
    seed: u64,
    fill: F,
) -> Result<()>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    out.par_chunks_mut(chunk_size)
        .enumerate()
        .map(|(c, chunk)| {
            let mut rng = chunk_rng(seed, c as u64);
            fill(&mut rng, chunk)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// One unit-mean draw of an M-mode pump: the average of M single-mode draws.
#[inline]
pub(crate) fn unit_draw<R: Rng + ?Sized>(family: PumpFamily, modes: u32, rng: &mut R) -> f64 {
    let mut acc = 0.0;
    for _ in 0..modes {
        acc += match family {
            PumpFamily::Thermal => rng.sample::<f64, _>(Exp1),
            PumpFamily::Superbunched => {
                let z: f64 = rng.sample(StandardNormal);
                z * z
            }
        };
    }
    acc / f64::from(modes)
}

/// Sample `pulses` values of `spec` with the default chunking.
pub fn sample(spec: &DistributionSpec, pulses: usize, master_seed: u64) -> Result<PulseTrain> {
    sample_with(spec, pulses, master_seed, &SampleOptions::default())
}

pub fn sample_with(
    spec: &DistributionSpec,
    pulses: usize,
    master_seed: u64,
    options: &SampleOptions,
) -> Result<PulseTrain> {
    spec.validate()?;
    if pulses == 0 {
        return Err(Error::invalid("pulses", "must be >= 1"));
    }
    if options.chunk_size == 0 {
        return Err(Error::invalid("chunk_size", "must be >= 1"));
    }
    let family = spec.source.family();
    let modes = spec.modes;
    // Photon number = scale · unit^power for harmonics, sinh²(gain · unit) for FWM.
    let (scale, power) = match (spec.source, spec.harmonic) {
        (Source::Thermal { mean } | Source::Superbunched { mean }, None) => (mean, 1),
        (Source::Thermal { .. } | Source::Superbunched { .. }, Some(h)) => {
            // ⟨unitⁿ⟩ = g⁽ⁿ⁾ of the single-mode source
            let g =
                crate::distributions::analytic_gm(&DistributionSpec::new(spec.source), h.order)?;
            (h.mean / g, h.order)
        }
        (Source::FwmThermal { kappa_np } | Source::FwmSuperbunched { kappa_np }, _) => {
            (kappa_np, 0)
        }
    };

    let mut values = vec![0.0; pulses];
    options.run(|| {
        for_each_chunk(
            &mut values,
            options.chunk_size,
            master_seed,
            |rng, chunk| {
                for v in chunk.iter_mut() {
                    let u = unit_draw(family, modes, rng);
                    *v = match power {
                        0 => transforms::sinh_squared_gain(scale * u)?,
                        1 => scale * u,
                        n => scale * u.powi(n as i32),
                    };
                }
                Ok(())
            },
        )
    })??;

    let mut train = PulseTrain {
        values,
        meta: TrainMeta {
            spec: Some(spec.to_toml()),
            master_seed,
            pulse_count: pulses as u64,
            chunk_size: options.chunk_size as u64,
            transforms: Vec::new(),
        },
    };
    if spec.noise_sigma > 0.0 {
        let noise_seed = splitmix64(master_seed ^ NOISE_STREAM_TAG);
        transforms::add_noise(
            &mut train.values,
            spec.noise_sigma,
            None,
            noise_seed,
            options,
        )?;
    }
    Ok(train)
}

/// Rebuild a train from its provenance record.
pub fn regenerate(meta: &TrainMeta, threads: Option<usize>) -> Result<PulseTrain> {
    let spec = meta
        .spec
        .as_deref()
        .map(DistributionSpec::from_toml)
        .transpose()?
        .ok_or_else(|| {
            Error::invalid(
                "meta.spec",
                "train carries no spec; it cannot be regenerated",
            )
        })?;
    let options = SampleOptions {
        chunk_size: meta.chunk_size as usize,
        threads,
    };
    let mut train = sample_with(&spec, meta.pulse_count as usize, meta.master_seed, &options)?;
    for t in &meta.transforms {
        train = match *t {
            TransformRecord::Harmonic { order, conversion } => {
                harmonic_transform(&train, order, conversion)?
            }
            TransformRecord::Fwm { kappa } => fwm_transform(&train, kappa)?,
            TransformRecord::Loss { eta } => apply_loss(&train, eta)?,
            TransformRecord::Detector {
                noise_sigma,
                saturation,
                noise_seed,
            } => apply_detector(
                &train,
                &DetectorModel::new(noise_sigma, saturation)?,
                noise_seed,
            )?,
        };
    }
    Ok(train)
}
