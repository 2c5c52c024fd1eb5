#![allow(dead_code)]

use photon_tails::sampler::PulseTrain;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// ∫₀^hi f on the segments [hi·2^-(j+1), hi·2^-j], j < halvings; the
/// geometric segments absorb integrable singularities at 0.
pub fn integrate_to(f: impl Fn(f64) -> f64, hi: f64, halvings: usize) -> f64 {
    let rule = gauss_legendre(24);
    let mut total = 0.0;
    for j in 0..halvings {
        let b = hi * 0.5f64.powi(j as i32);
        let a = 0.5 * b;
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        total += h * rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>();
    }
    total
}

/// Pareto(k) samples with scale 1 by inverse CDF.
pub fn pareto(k: f64, n: usize, seed: u64) -> PulseTrain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PulseTrain::from_values(
        (0..n)
            .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / k))
            .collect(),
    )
}
