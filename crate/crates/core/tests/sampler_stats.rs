mod common;

use photon_tails::estimators::{
    empirical_ccdf, empirical_gm, fit_tail_exponent, ks_distance, spectral_g2_matrix, TailFitMethod,
};
use photon_tails::sampler::{
    apply_loss, fwm_transform, harmonic_transform, sample, synth_spectral_ensemble, Pump,
};
use photon_tails::{analytic_gm, analytic_tail_exponent, DistributionSpec};

fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn superbunched_variance_is_twice_the_squared_mean() {
    let m = 3.7;
    let t = sample(&DistributionSpec::superbunched(m), 10_000_000, 101).unwrap();
    let ratio = t.summary().variance / (m * m);
    assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
}

#[test]
fn many_modes_dilute_g2() {
    let t = sample(
        &DistributionSpec::thermal(5.0).with_modes(100),
        1_000_000,
        102,
    )
    .unwrap();
    let g = empirical_gm(&t, 2).unwrap().value;
    assert!((g - 1.01).abs() < 0.005, "{g}");
}

#[test]
fn thermal_correlation_functions() {
    let t = sample(&DistributionSpec::thermal(1.0), 10_000_000, 103).unwrap();
    for (m, want, tol) in [(2, 2.0, 0.01), (3, 6.0, 0.1), (4, 24.0, 1.0)] {
        let g = empirical_gm(&t, m).unwrap().value;
        assert!((g - want).abs() < tol, "g{m} = {g}");
    }
}

#[test]
fn fwm_deep_tail_slope() {
    let spec = DistributionSpec::fwm_superbunched(2.5);
    let t = sample(&spec, 10_000_000, 104).unwrap();
    let c = empirical_ccdf(&t).unwrap();
    let s = c.sorted();
    // survival window [1e-5, 1e-3]
    let (lo, hi) = (s[s.len() - 10_000], s[s.len() - 100]);
    let fit = fit_tail_exponent(&c, lo, hi, TailFitMethod::CcdfRegression).unwrap();
    assert!((fit.k - 0.1).abs() < 0.02, "k = {}", fit.k);
    assert_eq!(analytic_tail_exponent(&spec), Some(0.1));
}

#[test]
fn harmonic_transform_correlations() {
    let th = sample(&DistributionSpec::thermal(1.0), 10_000_000, 105).unwrap();
    let g = empirical_gm(&harmonic_transform(&th, 2, 1.0).unwrap(), 2)
        .unwrap()
        .value;
    assert!((g - 6.0).abs() < 0.3, "{g}");
    let sb = sample(&DistributionSpec::superbunched(1.0), 10_000_000, 106).unwrap();
    let g = empirical_gm(&harmonic_transform(&sb, 3, 1.0).unwrap(), 2)
        .unwrap()
        .value;
    assert!((g / 46.2 - 1.0).abs() < 0.2, "{g}");
}

#[test]
fn fwm_transform_matches_the_closed_form() {
    assert!(
        (fwm_transform(&photon_tails::PulseTrain::from_values(vec![1.0]), 1.0)
            .unwrap()
            .values[0]
            - 1.3810978455418157)
            .abs()
            < 1e-15
    );
    let pump = sample(&DistributionSpec::thermal(1.0), 1_000_000, 107).unwrap();
    let out = fwm_transform(&pump, 0.5).unwrap();
    let ks = ks_distance(&out, &DistributionSpec::fwm_thermal(0.5)).unwrap();
    assert!(ks.statistic < 0.01, "{}", ks.statistic);
}

#[test]
fn harmonic_spec_equals_transformed_source() {
    for sb in [false, true] {
        let (src, n, hmean) = if sb {
            (DistributionSpec::superbunched(2.0), 2, 1.59e3)
        } else {
            (DistributionSpec::thermal(2.0), 3, 40.0)
        };
        let k = hmean / (analytic_gm(&src, n).unwrap() * 2f64.powi(n as i32));
        let direct = sample(&src.with_harmonic(n, hmean), 200_000, 108).unwrap();
        let via = harmonic_transform(&sample(&src, 200_000, 109).unwrap(), n, k).unwrap();
        let d = two_sample_ks(&direct.values, &via.values);
        // α = 1e-3 critical value 1.95·√(2/n)
        assert!(d < 1.95 * (2.0 / 200_000f64).sqrt(), "{d}");
    }
}

#[test]
fn loss_scales_the_mean_and_keeps_the_tail() {
    let t = sample(&DistributionSpec::thermal(6.5e3), 1_000_000, 110).unwrap();
    let lossy = apply_loss(&t, 0.43).unwrap();
    assert!(
        (lossy.mean() / 2.8e3 - 1.0).abs() < 0.01,
        "{}",
        lossy.mean()
    );

    let sc = sample(
        &DistributionSpec::fwm_superbunched(4.0).with_modes(5),
        1_000_000,
        111,
    )
    .unwrap();
    let lossy = apply_loss(&sc, 0.43).unwrap();
    let (a, b) = (
        empirical_ccdf(&sc).unwrap(),
        empirical_ccdf(&lossy).unwrap(),
    );
    let k0 = fit_tail_exponent(&a, 1e4, 8e5, TailFitMethod::CcdfRegression).unwrap();
    let k1 = fit_tail_exponent(&b, 0.43 * 1e4, 0.43 * 8e5, TailFitMethod::CcdfRegression).unwrap();
    assert!((k0.k - k1.k).abs() < 1e-9);
}

#[test]
fn speckled_spectra_against_brute_force_moments() {
    let wl: Vec<f64> = (0..7).map(|i| 790.0 + 5.0 * f64::from(i)).collect();
    let kappa = [0.2, 0.3, 0.4, 0.1, 0.4, 0.3, 0.2];
    let e = synth_spectral_ensemble(
        &Pump::Law(DistributionSpec::thermal(1.0)),
        &wl,
        &kappa,
        true,
        10_000,
        7,
    )
    .unwrap();
    let g = spectral_g2_matrix(&e).unwrap();
    let p = e.pulses() as f64;
    for i in 0..7 {
        for j in 0..7 {
            let (mut si, mut sj, mut sij) = (0.0, 0.0, 0.0);
            for row in &e.spectra {
                si += row[i];
                sj += row[j];
                sij += row[i] * row[j];
            }
            let want = (sij / p) / ((si / p) * (sj / p));
            let got = g.get(i, j).unwrap();
            assert!(((got - want) / want).abs() < 1e-12);
        }
    }
    for i in 0..7 {
        assert!(g.get(i, i).unwrap() > 2.0);
        assert!(g.get(i, 6 - i).unwrap() > 1.0);
    }
    // mirror partners share their speckle, other pairs only the pump
    assert!(g.get(0, 6).unwrap() > g.get(0, 5).unwrap());

    let flat = synth_spectral_ensemble(&Pump::Constant(3.0), &wl, &kappa, false, 100, 7).unwrap();
    let g = spectral_g2_matrix(&flat).unwrap();
    assert!(g
        .values
        .iter()
        .flatten()
        .all(|e| (e.value().unwrap() - 1.0).abs() < 1e-12));
}
