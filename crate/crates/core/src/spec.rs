//! `DistributionSpec`: the description of a light statistic shared by the
//! analytic and Monte Carlo paths, plus its versioned key-value document.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Current version of the spec document schema.
pub const SPEC_VERSION: u32 = 1;

/// Single-mode field statistics of the fundamental radiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpFamily {
    /// Exponential photon-number law, g⁽ᵐ⁾ = m!.
    Thermal,
    /// Gamma(½) law of degenerate bright squeezed vacuum, g⁽ᵐ⁾ = (2m−1)!!.
    Superbunched,
}

impl PumpFamily {
    /// Gamma shape parameter of a single mode.
    pub fn mode_shape(self) -> f64 {
        match self {
            PumpFamily::Thermal => 1.0,
            PumpFamily::Superbunched => 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Source {
    /// Thermal light with mean photon number per pulse.
    Thermal { mean: f64 },
    /// Degenerate bright squeezed vacuum with mean photon number per pulse.
    Superbunched { mean: f64 },
    /// FWM output N = sinh²(κN_p) with a thermal pump; `kappa_np` is κ⟨N_p⟩.
    FwmThermal { kappa_np: f64 },
    /// FWM output with a superbunched pump.
    FwmSuperbunched { kappa_np: f64 },
}

impl Source {
    pub fn family(&self) -> PumpFamily {
        match self {
            Source::Thermal { .. } | Source::FwmThermal { .. } => PumpFamily::Thermal,
            Source::Superbunched { .. } | Source::FwmSuperbunched { .. } => {
                PumpFamily::Superbunched
            }
        }
    }

    pub fn is_fwm(&self) -> bool {
        matches!(
            self,
            Source::FwmThermal { .. } | Source::FwmSuperbunched { .. }
        )
    }

    fn name(&self) -> &'static str {
        match self {
            Source::Thermal { .. } => "thermal",
            Source::Superbunched { .. } => "superbunched",
            Source::FwmThermal { .. } => "fwm-thermal",
            Source::FwmSuperbunched { .. } => "fwm-superbunched",
        }
    }
}

/// n-th harmonic of the source, parameterized by its own mean ⟨N_nω⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub source: Source,
    /// `None` means harmonic order 1.
    pub harmonic: Option<Harmonic>,
    pub modes: u32,
    /// Detector noise standard deviation in photons/pulse; 0 disables it.
    pub noise_sigma: f64,
}

impl DistributionSpec {
    pub fn new(source: Source) -> Self {
        DistributionSpec {
            source,
            harmonic: None,
            modes: 1,
            noise_sigma: 0.0,
        }
    }

    pub fn thermal(mean: f64) -> Self {
        Self::new(Source::Thermal { mean })
    }

    pub fn superbunched(mean: f64) -> Self {
        Self::new(Source::Superbunched { mean })
    }

    pub fn fwm_thermal(kappa_np: f64) -> Self {
        Self::new(Source::FwmThermal { kappa_np })
    }

    pub fn fwm_superbunched(kappa_np: f64) -> Self {
        Self::new(Source::FwmSuperbunched { kappa_np })
    }

    pub fn with_modes(mut self, modes: u32) -> Self {
        self.modes = modes;
        self
    }

    /// Harmonic of order `order` whose output mean is `mean`. Order 1 clears it.
    pub fn with_harmonic(mut self, order: u32, mean: f64) -> Self {
        self.harmonic = if order == 1 {
            None
        } else {
            Some(Harmonic { order, mean })
        };
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn harmonic_order(&self) -> u32 {
        self.harmonic.map_or(1, |h| h.order)
    }

    /// Same spec without detector noise.
    pub fn noise_free(&self) -> Self {
        Self {
            noise_sigma: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.source {
            Source::Thermal { mean } | Source::Superbunched { mean } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::invalid(
                        "mean",
                        format!("must be finite and > 0, got {mean}"),
                    ));
                }
            }
            Source::FwmThermal { kappa_np } | Source::FwmSuperbunched { kappa_np } => {
                if !(kappa_np > 0.0 && kappa_np.is_finite()) {
                    return Err(Error::invalid(
                        "kappa_np",
                        format!("must be finite and > 0, got {kappa_np}"),
                    ));
                }
            }
        }
        if self.modes == 0 {
            return Err(Error::invalid("modes", "must be >= 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(
                "noise_sigma",
                format!("must be finite and >= 0, got {}", self.noise_sigma),
            ));
        }
        if let Some(h) = self.harmonic {
            if h.order == 0 {
                return Err(Error::invalid("harmonic_order", "must be >= 1"));
            }
            if !(h.mean > 0.0 && h.mean.is_finite()) {
                return Err(Error::invalid(
                    "harmonic_mean",
                    format!("must be finite and > 0, got {}", h.mean),
                ));
            }
            if h.order >= 2 {
                if self.source.is_fwm() {
                    return Err(Error::Unsupported(
                        "harmonic transform applies to thermal/superbunched sources only".into(),
                    ));
                }
                if self.modes > 1 {
                    return Err(Error::Unsupported(format!(
                        "harmonic order {} with {} modes: harmonics are defined for single-mode pumps only",
                        h.order, self.modes
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> SpecDocument {
        let (mean, kappa_np) = match self.source {
            Source::Thermal { mean } | Source::Superbunched { mean } => (Some(mean), None),
            Source::FwmThermal { kappa_np } | Source::FwmSuperbunched { kappa_np } => {
                (None, Some(kappa_np))
            }
        };
        SpecDocument {
            spec_version: SPEC_VERSION,
            source: self.source.name().to_string(),
            mean,
            kappa_np,
            harmonic_order: self.harmonic_order(),
            harmonic_mean: self.harmonic.map(|h| h.mean),
            modes: self.modes,
            noise_sigma: self.noise_sigma,
        }
    }

    /// Canonical TOML serialization.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_document()).expect("spec document serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            toml::from_str(text).map_err(|e| Error::invalid("spec", e.message().to_string()))?;
        doc.into_spec()
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_toml().as_bytes()).into()
    }
}

/// Key-value document form of [`DistributionSpec`].
///
/// ```toml
/// spec_version = 1
/// source = "fwm-superbunched"   # thermal | superbunched | fwm-thermal | fwm-superbunched
/// kappa_np = 4.0                # FWM sources only
/// # mean = 1.33e5               # thermal/superbunched only
/// harmonic_order = 1
/// # harmonic_mean = 1.59e3      # required when harmonic_order >= 2
/// modes = 5
/// noise_sigma = 0.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub spec_version: u32,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_np: Option<f64>,
    #[serde(default = "one")]
    pub harmonic_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_mean: Option<f64>,
    #[serde(default = "one")]
    pub modes: u32,
    #[serde(default)]
    pub noise_sigma: f64,
}

fn one() -> u32 {
    1
}

impl SpecDocument {
    pub fn into_spec(self) -> Result<DistributionSpec> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::invalid(
                "spec_version",
                format!(
                    "unsupported version {} (expected {SPEC_VERSION})",
                    self.spec_version
                ),
            ));
        }
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| {
                Error::invalid(field, format!("required for source \"{}\"", self.source))
            })
        };
        let forbid = |v: Option<f64>, field: &str| match v {
            Some(_) => Err(Error::invalid(
                field,
                format!("not allowed for source \"{}\"", self.source),
            )),
            None => Ok(()),
        };
        let source = match self.source.as_str() {
            "thermal" | "superbunched" => {
                forbid(self.kappa_np, "kappa_np")?;
                let mean = need(self.mean, "mean")?;
                if self.source == "thermal" {
                    Source::Thermal { mean }
                } else {
                    Source::Superbunched { mean }
                }
            }
            "fwm-thermal" | "fwm-superbunched" => {
                forbid(self.mean, "mean")?;
                let kappa_np = need(self.kappa_np, "kappa_np")?;
                if self.source == "fwm-thermal" {
                    Source::FwmThermal { kappa_np }
                } else {
                    Source::FwmSuperbunched { kappa_np }
                }
            }
            other => {
                return Err(Error::invalid(
                    "source",
                    format!("unknown source \"{other}\" (thermal, superbunched, fwm-thermal, fwm-superbunched)"),
                ))
            }
        };
        let harmonic = match (self.harmonic_order, self.harmonic_mean) {
            (0, _) => return Err(Error::invalid("harmonic_order", "must be >= 1")),
            (1, None) => None,
            (1, Some(_)) => {
                return Err(Error::invalid(
                    "harmonic_mean",
                    "only meaningful with harmonic_order >= 2",
                ))
            }
            (order, Some(mean)) => Some(Harmonic { order, mean }),
            (_, None) => {
                return Err(Error::invalid(
                    "harmonic_mean",
                    "required when harmonic_order >= 2",
                ))
            }
        };
        let spec = DistributionSpec {
            source,
            harmonic,
            modes: self.modes,
            noise_sigma: self.noise_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }
}
