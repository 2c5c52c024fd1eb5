//! Statistics computed from pulse trains and spectral ensembles.

mod ccdf;
mod histogram;
mod ks;
mod moments;
mod spectral;
mod tailfit;

pub use ccdf::{
    empirical_ccdf, hazard_curve, hazard_curve_with, CcdfPoint, EmpiricalCcdf, HazardPoint,
};
pub use histogram::{empirical_histogram, Bin, Binning, Histogram, HistogramSpec};
pub use ks::{kolmogorov_q, ks_distance, KsResult};
pub use moments::{
    empirical_gm, empirical_gm_with, estimate_mode_number, BootstrapOptions, GmEstimate,
    ModeEstimate, BOOTSTRAP_MAX_BLOCKS, BOOTSTRAP_RESAMPLES,
};
pub use spectral::{fmt17, spectral_g2_matrix, G2Entry, G2Matrix, SpectralEnsemble};
pub use tailfit::{
    compare_tail_fits, default_fit_window, fit_tail_exponent, TailFitComparison, TailFitMethod,
    TailFitReport, MIN_FIT_POINTS,
};

use crate::error::{Error, Result};

/// Ghost-image contrast R = 1 + (g² − 1)·a/A for an object of area `a`
/// inside a field of area `field`.
pub fn ghost_contrast(g2: f64, a: f64, field: f64) -> Result<f64> {
    if !(g2 >= 1.0 && g2.is_finite()) {
        return Err(Error::invalid("g2", "must be finite and >= 1"));
    }
    if !(a > 0.0 && field.is_finite()) {
        return Err(Error::invalid("a", "object area must be > 0"));
    }
    if a > field {
        return Err(Error::invalid(
            "a",
            format!("object area {a} exceeds field area {field}"),
        ));
    }
    Ok(1.0 + (g2 - 1.0) * a / field)
}

/// Mean photon number after single-photon subtraction, g²·⟨N⟩.
pub fn subtracted_mean(g2: f64, mean: f64) -> Result<f64> {
    if !(g2 >= 1.0 && g2.is_finite()) {
        return Err(Error::invalid("g2", "must be finite and >= 1"));
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::invalid("mean", "must be finite and > 0"));
    }
    Ok(g2 * mean)
}
