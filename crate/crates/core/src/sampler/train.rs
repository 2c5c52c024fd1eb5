use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::DistributionSpec;

/// One element-wise stage applied after sampling, in application order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum TransformRecord {
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
        noise_sigma: f64,
        saturation: Option<f64>,
        noise_seed: u64,
    },
}

impl TransformRecord {
    /// Position in the physical chain source → harmonic/FWM → loss → detector.
    pub fn rank(&self) -> u8 {
        match self {
            TransformRecord::Harmonic { .. } | TransformRecord::Fwm { .. } => 1,
            TransformRecord::Loss { .. } => 2,
            TransformRecord::Detector { .. } => 3,
        }
    }
}

/// Provenance of a pulse train.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    /// Canonical spec document, absent for trains built from raw data.
    pub spec: Option<String>,
    pub master_seed: u64,
    pub pulse_count: u64,
    pub chunk_size: u64,
    #[serde(default)]
    pub transforms: Vec<TransformRecord>,
}

/// Per-pulse photon numbers in generation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub values: Vec<f64>,
    pub meta: TrainMeta,
}

impl PulseTrain {
    /// Wrap measured or externally produced values.
    pub fn from_values(values: Vec<f64>) -> Self {
        let meta = TrainMeta {
            spec: None,
            master_seed: 0,
            pulse_count: values.len() as u64,
            chunk_size: super::DEFAULT_CHUNK_SIZE as u64,
            transforms: Vec::new(),
        };
        PulseTrain { values, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spec(&self) -> Result<Option<DistributionSpec>> {
        self.meta
            .spec
            .as_deref()
            .map(DistributionSpec::from_toml)
            .transpose()
    }

    /// True once detector noise or saturation has been applied.
    pub fn is_detected(&self) -> bool {
        let noisy_spec = self
            .spec()
            .ok()
            .flatten()
            .is_some_and(|s| s.noise_sigma > 0.0);
        noisy_spec
            || self
                .meta
                .transforms
                .iter()
                .any(|t| matches!(t, TransformRecord::Detector { .. }))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Appends `record`, enforcing the stage order.
    pub(crate) fn push_transform(&mut self, record: TransformRecord) -> Result<()> {
        if self.is_detected() {
            return Err(Error::Ordering(format!(
                "{record:?} after detection: detector noise and saturation are always the last stage"
            )));
        }
        if let Some(last) = self.meta.transforms.last() {
            if record.rank() < last.rank() {
                return Err(Error::Ordering(format!(
                    "{record:?} cannot follow {last:?} (order: harmonic/FWM, loss, detector)"
                )));
            }
        }
        self.meta.transforms.push(record);
        Ok(())
    }

    pub fn summary(&self) -> Summary {
        let n = self.values.len() as f64;
        let mean = self.mean();
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Summary {
            pulses: self.values.len() as u64,
            mean,
            variance: var,
            min: self.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: self
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pulses: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}
