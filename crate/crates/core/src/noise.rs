//! Detector-noise convolution of the closed-form laws.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distributions::Law;
use crate::error::{Error, Result};
use crate::spec::DistributionSpec;
use crate::special::normal_cdf;

/// Upper-tail probability the convolution grid must reach.
pub const GRID_TAIL: f64 = 1e-6;
/// Grid spacing in units of sigma.
pub const MAX_SPACING_SIGMAS: f64 = 0.1;
/// Lower edge of the grid in units of sigma.
pub const LOWER_EDGE_SIGMAS: f64 = 6.0;
/// Noise kernel cut-off in units of sigma.
const KERNEL_SIGMAS: f64 = 10.0;
/// Cells narrower than this many sigmas use the midpoint kernel.
const NARROW_CELL: f64 = 1e-3;

/// A density sampled on a grid, with its trapezoidal normalization error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPdf {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub normalization_error: f64,
}

impl TabulatedPdf {
    pub fn new(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.len() != density.len() || grid.len() < 2 {
            return Err(Error::invalid(
                "grid",
                "need >= 2 points and one density per point",
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "abscissae must increase strictly"));
        }
        if density.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::invalid("density", "values must be finite and >= 0"));
        }
        let mut t = TabulatedPdf {
            grid,
            density,
            normalization_error: 0.0,
        };
        t.normalization_error = (t.total() - 1.0).abs();
        Ok(t)
    }

    /// Trapezoidal integral over the grid.
    pub fn total(&self) -> f64 {
        self.cumulative().last().copied().unwrap_or(0.0)
    }

    /// Running trapezoidal integral, one entry per grid point.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.grid.len());
        out.push(0.0);
        for i in 1..self.grid.len() {
            acc +=
                0.5 * (self.density[i] + self.density[i - 1]) * (self.grid[i] - self.grid[i - 1]);
            out.push(acc);
        }
        out
    }

    /// Trapezoidal mean.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let (x0, x1) = (self.grid[i - 1], self.grid[i]);
            let (f0, f1) = (self.density[i - 1], self.density[i]);
            // exact integral of x·f for linear f on [x0, x1]
            acc += (x1 - x0) * (f0 * (2.0 * x0 + x1) + f1 * (x0 + 2.0 * x1)) / 6.0;
        }
        acc
    }

    /// Linear interpolation; zero outside the grid.
    pub fn density_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let t = (x - g[i - 1]) / (g[i] - g[i - 1]);
        self.density[i - 1] + t * (self.density[i] - self.density[i - 1])
    }

    /// CDF evaluator built from the trapezoid rule (piecewise-quadratic
    /// inside cells), normalized by the tabulated total.
    pub fn cdf_table(&self) -> TabulatedCdf<'_> {
        let cum = self.cumulative();
        let total = *cum.last().unwrap();
        TabulatedCdf {
            pdf: self,
            cum,
            total,
        }
    }
}

pub struct TabulatedCdf<'a> {
    pdf: &'a TabulatedPdf,
    cum: Vec<f64>,
    total: f64,
}

impl TabulatedCdf<'_> {
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.pdf.grid;
        let f = &self.pdf.density;
        if x <= g[0] {
            return 0.0;
        }
        if x >= g[g.len() - 1] {
            return 1.0;
        }
        let i = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let h = x - g[i - 1];
        let slope = (f[i] - f[i - 1]) / (g[i] - g[i - 1]);
        let partial = f[i - 1] * h + 0.5 * slope * h * h;
        ((self.cum[i - 1] + partial) / self.total).clamp(0.0, 1.0)
    }
}

/// Uniform grid satisfying the resolution requirements of
/// [`convolve_with_noise`] with some headroom.
pub fn noise_grid(spec: &DistributionSpec, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(
            "sigma",
            format!("must be finite and > 0, got {sigma}"),
        ));
    }
    let law = Law::of(&spec.noise_free())?;
    let top = law.upper_quantile(GRID_TAIL * 1e-3)? + 8.0 * sigma;
    let lo = -(LOWER_EDGE_SIGMAS + 2.0) * sigma;
    let step = sigma * MAX_SPACING_SIGMAS;
    let count = ((top - lo) / step).ceil() as usize + 1;
    if count > 50_000_000 {
        return Err(Error::Range(format!(
            "noise grid would need {count} points; the law is too wide for sigma = {sigma}"
        )));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Density of N + ε with ε ~ Normal(0, σ²), tabulated on `grid`.
///
/// The law's probability mass in each cell between consecutive nonnegative
/// grid points is taken exactly from its CCDF and spread uniformly over the
/// cell before convolving with the Gaussian kernel. Mass is conserved up to
/// the tail beyond the grid, and the integrable divergences at N = 0 need no
/// special treatment.
pub fn convolve_with_noise(
    spec: &DistributionSpec,
    sigma: f64,
    grid: &[f64],
) -> Result<TabulatedPdf> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(
            "sigma",
            format!("must be finite and > 0, got {sigma}"),
        ));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "grid",
            "need >= 2 strictly increasing abscissae",
        ));
    }
    let law = Law::of(&spec.noise_free())?;
    let need_hi = law.upper_quantile(GRID_TAIL)?;
    let need_lo = -LOWER_EDGE_SIGMAS * sigma;
    let max_spacing = sigma * MAX_SPACING_SIGMAS;
    let spacing = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if lo > need_lo || hi < need_hi || spacing > max_spacing * (1.0 + 1e-9) {
        return Err(Error::Resolution {
            need_lo,
            need_hi,
            max_spacing,
            lo,
            hi,
            spacing,
        });
    }

    // Source cells: geometric refinement of [0, first positive node] to
    // resolve densities that diverge at zero, then the positive grid nodes.
    let positive: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.0).collect();
    let mut edges = vec![0.0];
    if let Some(&first) = positive.first() {
        edges.extend((1..=48).rev().map(|j| first * 0.5f64.powi(j)));
    }
    // Cells near zero carry the strongest curvature; split them further.
    for (i, w) in positive.windows(2).enumerate() {
        let parts = if i < 64 { 8 } else { 1 };
        edges.extend((0..parts).map(|j| w[0] + (w[1] - w[0]) * j as f64 / parts as f64));
    }
    edges.extend(positive.last());
    let survival: Vec<f64> = edges.iter().map(|&e| law.ccdf(e)).collect();
    let cells: Vec<(f64, f64, f64)> = edges
        .windows(2)
        .zip(survival.windows(2))
        .map(|(e, s)| (e[0], e[1], s[0] - s[1]))
        .collect();

    let reach = KERNEL_SIGMAS * sigma;
    let density = grid
        .iter()
        .map(|&x| {
            let first = cells.partition_point(|c| c.1 < x - reach);
            let mut acc = 0.0;
            let mut upper = f64::NAN;
            for &(a, b, mass) in &cells[first..] {
                if a > x + reach {
                    break;
                }
                if b - a < NARROW_CELL * sigma {
                    // Φ differences cancel catastrophically here; the
                    // midpoint rule is exact to O((b−a)²/σ²).
                    let z = (x - 0.5 * (a + b)) / sigma;
                    acc += mass * (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt());
                    upper = f64::NAN;
                    continue;
                }
                // Φ at the shared edge carries over from the previous cell.
                let lower = if upper.is_nan() {
                    normal_cdf((x - a) / sigma)
                } else {
                    upper
                };
                upper = normal_cdf((x - b) / sigma);
                if mass > 0.0 {
                    acc += mass * (lower - upper) / (b - a);
                }
            }
            acc
        })
        .collect();
    TabulatedPdf::new(grid.to_vec(), density)
}
