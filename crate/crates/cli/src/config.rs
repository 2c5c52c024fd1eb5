//! Run configuration: spec, pulse count, seed, transform chain and analyses.
//!
//! ```toml
//! pulses = 1_000_000
//! master_seed = 42
//! loss_eta = 0.43                 # optional shorthand for a loss stage
//!
//! [spec]
//! spec_version = 1
//! source = "fwm-superbunched"
//! kappa_np = 2.5
//! modes = 5
//!
//! [detector]                      # optional shorthand for a detector stage
//! noise_sigma = 270.0
//! saturation = 1e6
//!
//! # Explicit stages run in the order written and must follow
//! # harmonic/fwm -> loss -> detector.
//! # [[stages]]
//! # kind = "harmonic"
//! # order = 2
//! # conversion = 1e-3
//!
//! [analyses]
//! gm = [2, 3]
//! ccdf = true
//! hazard = true
//! ks = false
//! histogram = { binning = "log", bins_per_decade = 10 }
//! tailfit = { method = "both", lo = 1e4, hi = 8e5 }
//! ```

use std::path::Path;

use photon_tails::estimators::{Binning, HistogramSpec, TailFitMethod};
use photon_tails::sampler::{
    apply_detector, apply_loss, fwm_transform, harmonic_transform, sample, splitmix64,
    DetectorModel, PulseTrain, TransformRecord,
};
use photon_tails::spec::SpecDocument;
use photon_tails::{DistributionSpec, Error, Result};
use serde::Deserialize;

const DETECTOR_SEED_TAG: u64 = 0x6465_7465_6374_6f72;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigDocument {
    pub spec: SpecDocument,
    pub pulses: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub loss_eta: Option<f64>,
    #[serde(default)]
    pub detector: Option<DetectorDocument>,
    #[serde(default)]
    pub stages: Vec<StageDocument>,
    #[serde(default)]
    pub analyses: AnalysesDocument,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorDocument {
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub saturation: Option<f64>,
    #[serde(default)]
    pub noise_seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StageDocument {
    Harmonic {
        order: u32,
        conversion: f64,
    },
    Fwm {
        kappa: f64,
    },
    Loss {
        eta: f64,
    },
    Detector {
        #[serde(default)]
        noise_sigma: f64,
        #[serde(default)]
        saturation: Option<f64>,
        #[serde(default)]
        noise_seed: Option<u64>,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysesDocument {
    #[serde(default)]
    pub gm: Vec<u32>,
    #[serde(default)]
    pub ccdf: bool,
    #[serde(default)]
    pub hazard: bool,
    #[serde(default)]
    pub ks: bool,
    #[serde(default)]
    pub histogram: Option<HistogramDocument>,
    #[serde(default)]
    pub tailfit: Option<TailFitDocument>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramDocument {
    /// "linear" or "log"
    pub binning: String,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub bins_per_decade: Option<u32>,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFitDocument {
    /// "ccdf-regression", "hill" or "both"
    #[serde(default = "both")]
    pub method: TailFitChoice,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

fn both() -> TailFitChoice {
    TailFitChoice::Both
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFitChoice {
    CcdfRegression,
    Hill,
    Both,
}

impl TailFitChoice {
    pub fn methods(self) -> Vec<TailFitMethod> {
        match self {
            TailFitChoice::CcdfRegression => vec![TailFitMethod::CcdfRegression],
            TailFitChoice::Hill => vec![TailFitMethod::Hill],
            TailFitChoice::Both => vec![TailFitMethod::CcdfRegression, TailFitMethod::Hill],
        }
    }
}

/// Histogram binning with an optional range; a missing bound is taken from
/// the data when the analysis runs.
#[derive(Clone, Copy, Debug)]
pub struct HistogramRequest {
    pub binning: Binning,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl HistogramRequest {
    pub fn resolve(&self, train: &PulseTrain) -> HistogramSpec {
        let (min, max) = train
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let lo = self.lo.unwrap_or(match self.binning {
            Binning::Logarithmic { .. } => train
                .values
                .iter()
                .copied()
                .filter(|&v| v > 0.0)
                .fold(f64::INFINITY, f64::min),
            Binning::Linear { .. } => min,
        });
        let hi = self.hi.unwrap_or(max);
        HistogramSpec {
            binning: self.binning,
            lo,
            hi: if hi > lo { hi } else { lo + 1.0 },
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Analyses {
    pub gm: Vec<u32>,
    pub ccdf: bool,
    pub hazard: bool,
    pub ks: bool,
    pub histogram: Option<HistogramRequest>,
    pub tailfit: Option<(TailFitChoice, Option<(f64, f64)>)>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: DistributionSpec,
    pub pulses: usize,
    pub master_seed: u64,
    pub stages: Vec<TransformRecord>,
    pub analyses: Analyses,
}

impl RunConfig {
    /// Reads and validates a config; `seed` replaces `master_seed` before
    /// any seed is derived from it.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::parse_with_seed(&text, seed)
    }

    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_seed(text, None)
    }

    fn parse_with_seed(text: &str, seed: Option<u64>) -> Result<Self> {
        let mut doc: RunConfigDocument =
            toml::from_str(text).map_err(|e| Error::invalid("config", e.message().to_string()))?;
        if let Some(seed) = seed {
            doc.master_seed = seed;
        }
        doc.into_config()
    }

    /// The detector in the stage list, if any.
    pub fn detector(&self) -> Option<DetectorModel> {
        self.stages.iter().find_map(|s| match *s {
            TransformRecord::Detector {
                noise_sigma,
                saturation,
                ..
            } => Some(DetectorModel {
                noise_sigma,
                saturation,
            }),
            _ => None,
        })
    }

    /// Samples the spec and applies every stage in order.
    pub fn run(&self) -> Result<PulseTrain> {
        let mut train = sample(&self.spec, self.pulses, self.master_seed)?;
        for stage in &self.stages {
            train = match *stage {
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
}

impl RunConfigDocument {
    pub fn into_config(self) -> Result<RunConfig> {
        let spec = self.spec.into_spec()?;
        if self.pulses == 0 {
            return Err(Error::invalid("pulses", "must be >= 1"));
        }
        let pulses =
            usize::try_from(self.pulses).map_err(|_| Error::invalid("pulses", "too large"))?;
        let default_seed = splitmix64(self.master_seed ^ DETECTOR_SEED_TAG);

        let mut stages: Vec<TransformRecord> = self
            .stages
            .iter()
            .map(|s| match *s {
                StageDocument::Harmonic { order, conversion } => {
                    TransformRecord::Harmonic { order, conversion }
                }
                StageDocument::Fwm { kappa } => TransformRecord::Fwm { kappa },
                StageDocument::Loss { eta } => TransformRecord::Loss { eta },
                StageDocument::Detector {
                    noise_sigma,
                    saturation,
                    noise_seed,
                } => TransformRecord::Detector {
                    noise_sigma,
                    saturation,
                    noise_seed: noise_seed.unwrap_or(default_seed),
                },
            })
            .collect();
        if let Some(eta) = self.loss_eta {
            if stages
                .iter()
                .any(|s| matches!(s, TransformRecord::Loss { .. }))
            {
                return Err(Error::invalid(
                    "loss_eta",
                    "loss given both as loss_eta and in [[stages]]",
                ));
            }
            stages.push(TransformRecord::Loss { eta });
        }
        if let Some(d) = self.detector {
            if stages
                .iter()
                .any(|s| matches!(s, TransformRecord::Detector { .. }))
            {
                return Err(Error::invalid(
                    "detector",
                    "detector given both as [detector] and in [[stages]]",
                ));
            }
            stages.push(TransformRecord::Detector {
                noise_sigma: d.noise_sigma,
                saturation: d.saturation,
                noise_seed: d.noise_seed.unwrap_or(default_seed),
            });
        }
        validate_stages(&spec, &stages)?;
        let analyses = self.analyses.into_analyses()?;
        Ok(RunConfig {
            spec,
            pulses,
            master_seed: self.master_seed,
            stages,
            analyses,
        })
    }
}

fn validate_stages(spec: &DistributionSpec, stages: &[TransformRecord]) -> Result<()> {
    let mut detected = spec.noise_sigma > 0.0;
    let mut last = 0u8;
    for (i, s) in stages.iter().enumerate() {
        let field = format!("stages[{i}]");
        if detected {
            return Err(Error::Ordering(format!(
                "{field}: nothing may follow detection (spec noise_sigma or a detector stage)"
            )));
        }
        if s.rank() < last {
            return Err(Error::Ordering(format!(
                "{field}: order must be harmonic/fwm -> loss -> detector"
            )));
        }
        last = s.rank();
        match *s {
            TransformRecord::Harmonic { order, conversion } => {
                if order < 2 {
                    return Err(Error::invalid(field, "harmonic order must be >= 2"));
                }
                if !(conversion > 0.0 && conversion.is_finite()) {
                    return Err(Error::invalid(field, "conversion must be finite and > 0"));
                }
            }
            TransformRecord::Fwm { kappa } => {
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::invalid(field, "kappa must be finite and > 0"));
                }
            }
            TransformRecord::Loss { eta } => {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(Error::invalid(
                        field,
                        format!("eta must lie in (0, 1], got {eta}"),
                    ));
                }
            }
            TransformRecord::Detector {
                noise_sigma,
                saturation,
                ..
            } => {
                DetectorModel::new(noise_sigma, saturation)
                    .map_err(|e| Error::invalid(field, e.to_string()))?;
                detected = true;
            }
        }
    }
    Ok(())
}

impl AnalysesDocument {
    fn into_analyses(self) -> Result<Analyses> {
        if let Some(m) = self.gm.iter().find(|&&m| m == 0) {
            return Err(Error::invalid(
                "analyses.gm",
                format!("order {m} must be >= 1"),
            ));
        }
        let histogram = self
            .histogram
            .map(|h| {
                let binning = match h.binning.as_str() {
                    "linear" => Binning::Linear {
                        width: h.width.ok_or_else(|| {
                            Error::invalid("analyses.histogram.width", "required for linear bins")
                        })?,
                    },
                    "log" | "logarithmic" => Binning::Logarithmic {
                        bins_per_decade: h.bins_per_decade.unwrap_or(10),
                    },
                    other => {
                        return Err(Error::invalid(
                            "analyses.histogram.binning",
                            format!("unknown binning \"{other}\" (linear | log)"),
                        ))
                    }
                };
                let probe = HistogramSpec {
                    binning,
                    lo: h.lo.unwrap_or(1.0),
                    hi: h.hi.unwrap_or(h.lo.unwrap_or(1.0) + 1.0),
                };
                probe.validate()?;
                if let (Some(lo), Some(hi)) = (h.lo, h.hi) {
                    HistogramSpec { binning, lo, hi }.validate()?;
                }
                Ok(HistogramRequest {
                    binning,
                    lo: h.lo,
                    hi: h.hi,
                })
            })
            .transpose()?;
        let tailfit = self
            .tailfit
            .map(|t| match (t.lo, t.hi) {
                (Some(lo), Some(hi)) if lo > 0.0 && hi > lo => Ok((t.method, Some((lo, hi)))),
                (None, None) => Ok((t.method, None)),
                _ => Err(Error::invalid(
                    "analyses.tailfit",
                    "give both lo and hi with 0 < lo < hi, or neither for the default window",
                )),
            })
            .transpose()?;
        Ok(Analyses {
            gm: self.gm,
            ccdf: self.ccdf,
            hazard: self.hazard,
            ks: self.ks,
            histogram,
            tailfit,
        })
    }
}
