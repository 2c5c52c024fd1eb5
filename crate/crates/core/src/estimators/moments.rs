use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{chunk_rng, splitmix64, PulseTrain};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Resampling works on at most this many contiguous blocks of pulses.
pub const BOOTSTRAP_MAX_BLOCKS: usize = 10_000;
const BOOTSTRAP_STREAM_TAG: u64 = 0x626f_6f74_7374_7270;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
}

impl BootstrapOptions {
    /// Default resampling, seeded from the train's master seed.
    pub fn for_train(train: &PulseTrain) -> Self {
        BootstrapOptions {
            resamples: BOOTSTRAP_RESAMPLES,
            seed: splitmix64(train.meta.master_seed ^ BOOTSTRAP_STREAM_TAG),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmEstimate {
    pub m: u32,
    pub value: f64,
    /// Bootstrap standard error; absent below 100 pulses.
    pub stderr: Option<f64>,
    pub resamples: usize,
}

/// ⟨Nᵐ⟩/⟨N⟩ᵐ with a block-bootstrap standard error.
///
/// Computed on raw values: additive detector noise biases the ratio and is
/// not corrected for.
pub fn empirical_gm(train: &PulseTrain, m: u32) -> Result<GmEstimate> {
    empirical_gm_with(train, m, &BootstrapOptions::for_train(train))
}

pub fn empirical_gm_with(
    train: &PulseTrain,
    m: u32,
    options: &BootstrapOptions,
) -> Result<GmEstimate> {
    if m == 0 {
        return Err(Error::invalid("m", "order must be >= 1"));
    }
    if train.is_empty() {
        return Err(Error::InsufficientData("g(m) of an empty train".into()));
    }
    let n = train.len();
    let mean = train.mean();
    if !(mean > 0.0) {
        return Err(Error::invalid(
            "train",
            format!("mean {mean} is not positive; g(m) needs a noise-free or noise-aware pipeline"),
        ));
    }
    // Moments of N/⟨N⟩ stay O(1) and make the ratio scale-free.
    let blocks = n.min(BOOTSTRAP_MAX_BLOCKS);
    let mut s1 = vec![0.0; blocks];
    let mut sm = vec![0.0; blocks];
    let mut counts = vec![0usize; blocks];
    for (i, &v) in train.values.iter().enumerate() {
        let b = i * blocks / n;
        let x = v / mean;
        s1[b] += x;
        sm[b] += x.powi(m as i32);
        counts[b] += 1;
    }
    let ratio = |a: f64, b: f64, c: usize| {
        let c = c as f64;
        (b / c) / (a / c).powi(m as i32)
    };
    let value = ratio(s1.iter().sum(), sm.iter().sum(), n);

    let stderr = if n >= 100 && options.resamples >= 2 {
        let mut rng = chunk_rng(options.seed, 0);
        let reps: Vec<f64> = (0..options.resamples)
            .map(|_| {
                let (mut a, mut b, mut c) = (0.0, 0.0, 0);
                for _ in 0..blocks {
                    let k = rng.random_range(0..blocks);
                    a += s1[k];
                    b += sm[k];
                    c += counts[k];
                }
                ratio(a, b, c)
            })
            .collect();
        let mu = reps.iter().sum::<f64>() / reps.len() as f64;
        let var = reps.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / (reps.len() - 1) as f64;
        Some(var.sqrt())
    } else {
        None
    };
    Ok(GmEstimate {
        m,
        value,
        stderr,
        resamples: if stderr.is_some() {
            options.resamples
        } else {
            0
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEstimate {
    pub modes: f64,
    pub nearest: u32,
}

/// Inverts g_M = 1 + (g₁ − 1)/M.
pub fn estimate_mode_number(g_measured: f64, g_single: f64) -> Result<ModeEstimate> {
    if !(g_measured > 1.0) {
        return Err(Error::invalid(
            "g_measured",
            format!("{g_measured} <= 1: input is not chaotic light, no mode number exists"),
        ));
    }
    if !(g_single >= g_measured) || !g_single.is_finite() {
        return Err(Error::invalid(
            "g_single",
            "must be finite and >= g_measured",
        ));
    }
    let modes = (g_single - 1.0) / (g_measured - 1.0);
    Ok(ModeEstimate {
        modes,
        nearest: (modes.round() as u32).max(1),
    })
}
