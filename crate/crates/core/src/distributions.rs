//! Closed-form photon-number laws.
//!
//! Every family in this crate is the image of a Gamma-distributed variable
//! under a monotone map. With `X ~ Gamma(shape, 1)`:
//!
//! | spec                         | shape  | photon number N                 |
//! |------------------------------|--------|---------------------------------|
//! | thermal, M modes             | M      | (⟨N⟩/M)·X                       |
//! | superbunched, M modes        | M/2    | (2⟨N⟩/M)·X                      |
//! | thermal, n-th harmonic       | 1      | (⟨N_nω⟩/n!)·Xⁿ                  |
//! | superbunched, n-th harmonic  | 1/2    | (2ⁿ⟨N_nω⟩/(2n−1)!!)·Xⁿ          |
//! | FWM, thermal pump, M modes   | M      | sinh²((κ⟨N_p⟩/M)·X)             |
//! | FWM, superbunched pump, M    | M/2    | sinh²((2κ⟨N_p⟩/M)·X)            |
//!
//! so CCDFs are regularized upper incomplete gamma functions (Erfc for shape
//! one half) of the pulled-back argument, and densities follow by change of
//! variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::{DistributionSpec, Source};
use crate::special::{gamma_p, gamma_q, ln_gamma, ln_gamma_q};

/// Largest gain G = κN_p for which sinh²G is finite in `f64`.
pub const MAX_GAIN: f64 = 350.0;

/// A probability density value; densities that diverge at N = 0 are tagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Density {
    Finite(f64),
    Infinite,
}

impl Density {
    pub fn value(self) -> f64 {
        match self {
            Density::Finite(v) => v,
            Density::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Density::Infinite)
    }
}

/// Gamma variable pushed through `N = out(scale·Xᵖ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Law {
    pub shape: f64,
    pub scale: f64,
    pub power: u32,
    /// `out` is sinh² instead of the identity.
    pub fwm: bool,
}

impl Law {
    pub fn of(spec: &DistributionSpec) -> Result<Law> {
        spec.validate()?;
        let m = f64::from(spec.modes);
        let a = spec.source.family().mode_shape() * m;
        let law = match (spec.source, spec.harmonic) {
            (Source::Thermal { mean } | Source::Superbunched { mean }, None) => Law {
                shape: a,
                scale: mean / a,
                power: 1,
                fwm: false,
            },
            (Source::Thermal { .. } | Source::Superbunched { .. }, Some(h)) => {
                let n = f64::from(h.order);
                // ⟨Xⁿ⟩ = Γ(a+n)/Γ(a)
                let moment = (ln_gamma(a + n) - ln_gamma(a)).exp();
                Law {
                    shape: a,
                    scale: h.mean / moment,
                    power: h.order,
                    fwm: false,
                }
            }
            (Source::FwmThermal { kappa_np } | Source::FwmSuperbunched { kappa_np }, _) => Law {
                shape: a,
                scale: kappa_np / a,
                power: 1,
                fwm: true,
            },
        };
        Ok(law)
    }

    fn pull_back(&self, n: f64) -> f64 {
        let y = if self.fwm { n.sqrt().asinh() } else { n };
        let r = y / self.scale;
        if self.power == 1 {
            r
        } else {
            r.powf(1.0 / f64::from(self.power))
        }
    }

    pub fn ccdf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 1.0;
        }
        gamma_q(self.shape, self.pull_back(n))
    }

    pub fn cdf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        gamma_p(self.shape, self.pull_back(n))
    }

    pub fn ln_ccdf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        ln_gamma_q(self.shape, self.pull_back(n))
    }

    /// Exponent e of the small-N behaviour pdf ~ Nᵉ.
    fn origin_exponent(&self) -> f64 {
        let q = if self.fwm { 2.0 } else { 1.0 };
        self.shape / (f64::from(self.power) * q) - 1.0
    }

    pub fn pdf(&self, n: f64) -> Density {
        if n < 0.0 {
            return Density::Finite(0.0);
        }
        if n == 0.0 {
            let e = self.origin_exponent();
            return if e < -1e-12 {
                Density::Infinite
            } else if e > 1e-12 {
                Density::Finite(0.0)
            } else {
                let q = if self.fwm { 2.0 } else { 1.0 };
                let p = f64::from(self.power);
                Density::Finite((-(q * self.scale.ln()) - ln_gamma(self.shape)).exp() / (p * q))
            };
        }
        let a = self.shape;
        let x = self.pull_back(n);
        let y = self.scale * x.powi(self.power as i32);
        // ln dy/dN
        let ln_jac = if self.fwm {
            -(std::f64::consts::LN_2 + 0.5 * (n.ln() + n.ln_1p()))
        } else {
            0.0
        };
        let ln_pdf = a * x.ln() - x - ln_gamma(a) - (f64::from(self.power) * y).ln() + ln_jac;
        Density::Finite(ln_pdf.exp())
    }

    /// Mean photon number; `None` when it diverges.
    pub fn mean(&self) -> Option<f64> {
        if self.fwm {
            // E[sinh²(sX)] = (E e^{2sX} + E e^{−2sX} − 2)/4
            let s = self.scale;
            if 2.0 * s >= 1.0 {
                return None;
            }
            let a = self.shape;
            Some(((1.0 - 2.0 * s).powf(-a) + (1.0 + 2.0 * s).powf(-a) - 2.0) / 4.0)
        } else {
            let p = f64::from(self.power);
            Some(self.scale * (ln_gamma(self.shape + p) - ln_gamma(self.shape)).exp())
        }
    }

    /// N at which the upper tail probability equals `tail`.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::invalid(
                "probability",
                format!("must lie in (0, 1), got {tail}"),
            ));
        }
        // below(n) is true while n is left of the quantile
        let below = |n: f64| {
            if tail < 0.5 {
                self.ccdf(n) > tail
            } else {
                self.cdf(n) < 1.0 - tail
            }
        };
        let mut hi = 1.0f64;
        while below(hi) {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Range(format!(
                    "quantile for upper tail {tail} exceeds the f64 range"
                )));
            }
        }
        let mut lo = hi / 2.0;
        while !below(lo) {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-300 {
                return Ok(0.0);
            }
        }
        while hi / lo - 1.0 > 1e-12 {
            let mid = (lo * hi).sqrt();
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn require_noise_free(spec: &DistributionSpec) -> Result<()> {
    if spec.noise_sigma > 0.0 {
        return Err(Error::invalid(
            "noise_sigma",
            "closed forms are noise-free; use convolve_with_noise for detected laws",
        ));
    }
    Ok(())
}

fn require_nonnegative(n: f64) -> Result<()> {
    if n.is_nan() || n < 0.0 {
        return Err(Error::invalid(
            "n",
            format!("photon number must be >= 0, got {n}"),
        ));
    }
    Ok(())
}

/// Probability density at photon number `n`.
pub fn pdf(spec: &DistributionSpec, n: f64) -> Result<Density> {
    require_noise_free(spec)?;
    require_nonnegative(n)?;
    Ok(Law::of(spec)?.pdf(n))
}

/// Complementary CDF, P(N > n).
pub fn ccdf(spec: &DistributionSpec, n: f64) -> Result<f64> {
    require_noise_free(spec)?;
    require_nonnegative(n)?;
    Ok(Law::of(spec)?.ccdf(n))
}

/// ln P(N > n), finite far beyond the underflow point of [`ccdf`].
pub fn log_ccdf(spec: &DistributionSpec, n: f64) -> Result<f64> {
    require_noise_free(spec)?;
    require_nonnegative(n)?;
    Ok(Law::of(spec)?.ln_ccdf(n))
}

/// CDF, P(N ≤ n); accurate for small probabilities.
pub fn cdf(spec: &DistributionSpec, n: f64) -> Result<f64> {
    require_noise_free(spec)?;
    Ok(Law::of(spec)?.cdf(n))
}

/// Hazard function H(n) = −ln P(N > n). `+∞` when the survival is zero.
pub fn hazard(spec: &DistributionSpec, n: f64) -> Result<f64> {
    Ok(-log_ccdf(spec, n)?)
}

/// Mean photon number; `None` if it diverges (FWM with k ≤ 1).
pub fn analytic_mean(spec: &DistributionSpec) -> Result<Option<f64>> {
    Ok(Law::of(&spec.noise_free())?.mean())
}

/// g⁽ᵐ⁾ = ⟨Nᵐ⟩/⟨N⟩ᵐ of the source family.
///
/// Harmonics use g_nω⁽ᵐ⁾ = g_ω⁽ᵐⁿ⁾/(g_ω⁽ⁿ⁾)ᵐ. FWM outputs have no finite
/// moments of all orders and are rejected.
pub fn analytic_gm(spec: &DistributionSpec, m: u32) -> Result<f64> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::invalid("m", "correlation order must be >= 1"));
    }
    if let Some(k) = analytic_tail_exponent(spec) {
        return Err(Error::MomentsUndefined { tail_exponent: k });
    }
    let a = spec.source.family().mode_shape() * f64::from(spec.modes);
    // g⁽ʲ⁾ of Gamma(a): Π_{i<j} (a+i)/a
    let g = |j: u32| (0..j).map(|i| (a + f64::from(i)) / a).product::<f64>();
    let n = spec.harmonic_order();
    Ok(g(m * n) / g(n).powi(m as i32))
}

/// Pareto tail exponent k of FWM laws, `None` for families that are not
/// regularly varying.
pub fn analytic_tail_exponent(spec: &DistributionSpec) -> Option<f64> {
    let m = f64::from(spec.modes);
    match spec.source {
        Source::FwmThermal { kappa_np } => Some(m / (2.0 * kappa_np)),
        Source::FwmSuperbunched { kappa_np } => Some(m / (4.0 * kappa_np)),
        _ => None,
    }
}

/// Inverse CDF by bisection.
pub fn quantile(spec: &DistributionSpec, p: f64) -> Result<f64> {
    require_noise_free(spec)?;
    Law::of(spec)?.upper_quantile(1.0 - p)
}

/// N such that P(N > n) = `tail`; precise for tiny tails.
pub fn upper_quantile(spec: &DistributionSpec, tail: f64) -> Result<f64> {
    require_noise_free(spec)?;
    Law::of(spec)?.upper_quantile(tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailTrend {
    /// C̄_a/C̄_b grows without bound: `a` has the heavier tail.
    Diverging,
    /// C̄_a/C̄_b → 0: `a` has the lighter tail.
    Vanishing,
    /// Tail equivalent.
    ConvergingToOne,
    /// Settles at a constant other than one.
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub grid: Vec<f64>,
    /// C̄_a/C̄_b; may overflow to ∞ where `log_ratio` stays finite.
    pub ratio: Vec<f64>,
    pub log_ratio: Vec<f64>,
    pub trend: TailTrend,
    /// (H_a − H_b)/N at the last grid point: the tail-index difference.
    pub hazard_rate_gap: f64,
}

/// Ratio of two CCDFs on a log grid ending at `n_max`, classified from the
/// last decade.
pub fn compare_tails(
    a: &DistributionSpec,
    b: &DistributionSpec,
    n_max: f64,
    samples: usize,
) -> Result<TailComparison> {
    if !(n_max > 10.0 && n_max.is_finite()) {
        return Err(Error::invalid(
            "n_max",
            format!("must be finite and > 10, got {n_max}"),
        ));
    }
    if samples < 8 {
        return Err(Error::invalid("samples", "need at least 8 grid points"));
    }
    let la = Law::of(&a.noise_free())?;
    let lb = Law::of(&b.noise_free())?;
    let start = (n_max * 1e-4).min(1.0);
    let span = (n_max / start).ln();
    let grid: Vec<f64> = (0..samples)
        .map(|i| start * (span * i as f64 / (samples - 1) as f64).exp())
        .collect();
    let log_ratio: Vec<f64> = grid
        .iter()
        .map(|&n| la.ln_ccdf(n) - lb.ln_ccdf(n))
        .collect();
    if log_ratio.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range("a CCDF vanished on the probe grid".into()));
    }
    let ratio = log_ratio.iter().map(|v| v.exp()).collect();

    let decade_start = grid
        .iter()
        .position(|&n| n >= n_max / 10.0)
        .unwrap_or(samples - 1)
        .min(samples - 2);
    let first = log_ratio[decade_start];
    let last = log_ratio[samples - 1];
    let change = last - first;
    let trend = if change.abs() < 0.01 {
        if last.abs() < 0.01 {
            TailTrend::ConvergingToOne
        } else {
            TailTrend::Bounded
        }
    } else if change > 0.0 {
        if last.abs() < first.abs() && last.abs() < 0.1 {
            TailTrend::ConvergingToOne
        } else {
            TailTrend::Diverging
        }
    } else if last.abs() < first.abs() && last.abs() < 0.1 {
        TailTrend::ConvergingToOne
    } else {
        TailTrend::Vanishing
    };
    Ok(TailComparison {
        hazard_rate_gap: -last / grid[samples - 1],
        grid,
        ratio,
        log_ratio,
        trend,
    })
}
