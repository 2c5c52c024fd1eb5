use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-shot spectra: `spectra[pulse][bin]` on bin centres `wavelengths` (nm).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEnsemble {
    pub wavelengths: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
}

impl SpectralEnsemble {
    pub fn new(wavelengths: Vec<f64>, spectra: Vec<Vec<f64>>) -> Result<Self> {
        if wavelengths.is_empty() {
            return Err(Error::invalid("wavelengths", "need at least one bin"));
        }
        if let Some((p, row)) = spectra
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != wavelengths.len())
        {
            return Err(Error::invalid(
                "spectra",
                format!(
                    "pulse {p} has {} bins, expected {}",
                    row.len(),
                    wavelengths.len()
                ),
            ));
        }
        if spectra
            .iter()
            .flatten()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid(
                "spectra",
                "spectral densities must be finite and >= 0",
            ));
        }
        Ok(SpectralEnsemble {
            wavelengths,
            spectra,
        })
    }

    pub fn pulses(&self) -> usize {
        self.spectra.len()
    }

    /// The train of one bin across pulses.
    pub fn bin(&self, j: usize) -> Vec<f64> {
        self.spectra.iter().map(|row| row[j]).collect()
    }
}

/// A g² entry, or the sentinel for bins whose mean is zero.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum G2Entry {
    Value(f64),
    Masked(MaskedTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskedTag {
    Masked,
}

impl G2Entry {
    pub const MASKED: G2Entry = G2Entry::Masked(MaskedTag::Masked);

    pub fn value(self) -> Option<f64> {
        match self {
            G2Entry::Value(v) => Some(v),
            G2Entry::Masked(_) => None,
        }
    }
}

impl Serialize for G2Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            G2Entry::Value(v) => s.serialize_f64(*v),
            G2Entry::Masked(_) => s.serialize_str("masked"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Matrix {
    pub wavelengths: Vec<f64>,
    pub values: Vec<Vec<G2Entry>>,
}

impl G2Matrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j].value()
    }

    /// Header row and first column carry the wavelengths.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wavelength_nm");
        for w in &self.wavelengths {
            write!(out, ",{}", fmt17(*w)).unwrap();
        }
        out.push('\n');
        for (w, row) in self.wavelengths.iter().zip(&self.values) {
            out.push_str(&fmt17(*w));
            for e in row {
                match e.value() {
                    Some(v) => write!(out, ",{}", fmt17(v)).unwrap(),
                    None => out.push_str(",masked"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() && v != 0.0 && (v.abs() >= 1e16 || v.abs() < 1e-5) {
        format!("{v:.16e}")
    } else if v.is_finite() {
        let digits = if v == 0.0 {
            0
        } else {
            16 - v.abs().log10().floor() as i32
        };
        let s = format!("{:.*}", digits.max(0) as usize, v);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        v.to_string()
    }
}

/// g²(λ,λ′) = ⟨S(λ)S(λ′)⟩ / (⟨S(λ)⟩⟨S(λ′)⟩) over pulses.
pub fn spectral_g2_matrix(ensemble: &SpectralEnsemble) -> Result<G2Matrix> {
    let p = ensemble.pulses();
    if p < 2 {
        return Err(Error::InsufficientData(format!(
            "g² needs >= 2 pulses, got {p}"
        )));
    }
    let bins = ensemble.wavelengths.len();
    let mut means = vec![0.0; bins];
    for row in &ensemble.spectra {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= p as f64);
    let mut cross = vec![0.0; bins * bins];
    for row in &ensemble.spectra {
        for i in 0..bins {
            let si = row[i];
            if si == 0.0 {
                continue;
            }
            for j in i..bins {
                cross[i * bins + j] += si * row[j];
            }
        }
    }
    let mut values = vec![vec![G2Entry::MASKED; bins]; bins];
    for i in 0..bins {
        for j in i..bins {
            if means[i] > 0.0 && means[j] > 0.0 {
                let g = cross[i * bins + j] / p as f64 / (means[i] * means[j]);
                values[i][j] = G2Entry::Value(g);
                values[j][i] = G2Entry::Value(g);
            }
        }
    }
    Ok(G2Matrix {
        wavelengths: ensemble.wavelengths.clone(),
        values,
    })
}
