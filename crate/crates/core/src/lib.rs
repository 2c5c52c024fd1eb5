//! Photon-number statistics of strongly fluctuating light.
//!
//! Closed-form laws for thermal light, bright squeezed vacuum, their optical
//! harmonics and four-wave-mixing outputs ([`distributions`], [`noise`]), a
//! deterministic chunk-parallel Monte Carlo sampler ([`sampler`]) and the
//! estimators applied to pulse trains ([`estimators`]).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod io;
pub mod noise;
pub mod sampler;
pub mod spec;
pub mod special;

pub use distributions::{
    analytic_gm, analytic_mean, analytic_tail_exponent, ccdf, cdf, compare_tails, hazard, log_ccdf,
    pdf, quantile, upper_quantile, Density, TailComparison, TailTrend,
};
pub use error::{Error, Result};
pub use noise::{convolve_with_noise, noise_grid, TabulatedPdf};
pub use sampler::{
    apply_detector, apply_loss, fwm_transform, harmonic_transform, regenerate, sample, sample_with,
    synth_spectral_ensemble, DetectorModel, PulseTrain, Pump, SampleOptions,
};
pub use spec::{DistributionSpec, Harmonic, PumpFamily, Source};
