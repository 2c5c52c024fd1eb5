mod common;

use photon_tails::estimators::{
    compare_tail_fits, default_fit_window, empirical_ccdf, empirical_gm, empirical_histogram,
    hazard_curve, ks_distance, spectral_g2_matrix, HistogramSpec, SpectralEnsemble,
};
use photon_tails::sampler::{apply_detector, sample, DetectorModel, PulseTrain};
use photon_tails::{ccdf, DistributionSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

#[test]
fn pareto_recovery_by_both_methods() {
    for (i, k) in [0.3, 0.5, 1.0].into_iter().enumerate() {
        let t = common::pareto(k, 1_000_000, 200 + i as u64);
        let c = empirical_ccdf(&t).unwrap();
        let cmp = compare_tail_fits(&c, 1.0, 1e-4f64.powf(-1.0 / k)).unwrap();
        assert!(
            (cmp.regression.k - k).abs() < 0.01,
            "{k}: {}",
            cmp.regression.k
        );
        assert!((cmp.hill.k - k).abs() < 0.01, "{k}: {}", cmp.hill.k);
        assert!(cmp.disagreement <= 3.0, "{k}: {}", cmp.disagreement);
        assert!(!cmp.non_pareto);
    }
}

#[test]
fn thermal_tail_is_flagged_non_pareto() {
    let t = sample(&DistributionSpec::thermal(1.0), 1_000_000, 210).unwrap();
    let c = empirical_ccdf(&t).unwrap();
    let narrow = compare_tail_fits(&c, 1.0, 3.0).unwrap();
    let wide = compare_tail_fits(&c, 1.0, 10.0).unwrap();
    assert!(narrow.non_pareto && wide.non_pareto);
    // the local slope of e^{-N} steepens with N
    assert!(wide.regression.k > narrow.regression.k + 0.5);
    assert!(wide.regression.r_squared < 0.99);
}

#[test]
fn default_windows() {
    let t = sample(
        &DistributionSpec::fwm_superbunched(4.0).with_modes(5),
        100_000,
        211,
    )
    .unwrap();
    let det = DetectorModel::new(270.0, Some(1e6)).unwrap();
    let d = apply_detector(&t, &det, 3).unwrap();
    let (lo, hi) = default_fit_window(&d, Some(&det)).unwrap();
    assert!((lo - 1.5 * d.mean()).abs() < 1e-9 * lo && hi == 8e5);
    let p = PulseTrain::from_values((0..=6).map(|i| 10f64.powi(i)).collect());
    let (lo, hi) = default_fit_window(&p, None).unwrap();
    assert!((lo - 100.0).abs() < 1e-9 && (hi - 1e4).abs() < 1e-6);
}

#[test]
fn hazard_curves() {
    let m = 50.0;
    let th = hazard_curve(&sample(&DistributionSpec::thermal(m), 1_000_000, 212).unwrap()).unwrap();
    for p in th.iter().filter(|p| p.n > 0.5 * m && p.n < 8.0 * m) {
        assert!((p.h_over_n * m - 1.0).abs() < 0.1, "{p:?}");
    }
    assert!(th.iter().all(|p| p.survival >= 1e-5));

    let sb =
        hazard_curve(&sample(&DistributionSpec::superbunched(m), 1_000_000, 213).unwrap()).unwrap();
    let tail: Vec<_> = sb.iter().filter(|p| p.n > m).collect();
    assert!(tail.windows(2).all(|w| w[1].h_over_n < w[0].h_over_n));
    assert!(tail.last().unwrap().h_over_n * 2.0 * m < 1.25);

    let fwm = hazard_curve(&sample(&DistributionSpec::fwm_thermal(0.5), 1_000_000, 214).unwrap())
        .unwrap();
    let harm = hazard_curve(
        &sample(
            &DistributionSpec::superbunched(1.0).with_harmonic(3, 1.0),
            1_000_000,
            215,
        )
        .unwrap(),
    )
    .unwrap();
    let (f, h) = (fwm.last().unwrap(), harm.last().unwrap());
    assert!(f.h_over_n < 0.02 * fwm[fwm.len() / 2].h_over_n);
    // over equal survival ranges the FWM ratio falls further
    let fall = |c: &[photon_tails::estimators::HazardPoint]| {
        let mid = c.iter().find(|p| p.survival < 0.1).unwrap();
        c.last().unwrap().h_over_n / mid.h_over_n
    };
    assert!(
        fall(&fwm) < fall(&harm),
        "{} vs {}",
        fall(&fwm),
        fall(&harm)
    );
    assert!(f.survival >= 1e-5 && h.survival >= 1e-5);
}

#[test]
fn g2_matrix_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(216);
    let indep: Vec<Vec<f64>> = (0..100_000)
        .map(|_| vec![rng.sample(Exp1), rng.sample(Exp1)])
        .collect();
    let g = spectral_g2_matrix(&SpectralEnsemble::new(vec![700.0, 900.0], indep).unwrap()).unwrap();
    assert!((g.get(0, 0).unwrap() - 2.0).abs() < 0.05);
    assert!((g.get(1, 1).unwrap() - 2.0).abs() < 0.05);
    assert!((g.get(0, 1).unwrap() - 1.0).abs() < 0.05);
    assert_eq!(g.get(0, 1), g.get(1, 0));

    let shared: Vec<Vec<f64>> = (0..100_000)
        .map(|_| {
            let x: f64 = rng.sample(Exp1);
            vec![x, x]
        })
        .collect();
    let g =
        spectral_g2_matrix(&SpectralEnsemble::new(vec![700.0, 900.0], shared).unwrap()).unwrap();
    assert!(g
        .values
        .iter()
        .flatten()
        .all(|e| (e.value().unwrap() - 2.0).abs() < 0.05));
}

#[test]
fn ks_separates_laws() {
    let t = sample(&DistributionSpec::thermal(4.0), 1_000_000, 217).unwrap();
    let same = ks_distance(&t, &DistributionSpec::thermal(4.0)).unwrap();
    assert!(same.statistic <= 0.005 && same.p_bound > 1e-3);
    let other = ks_distance(&t, &DistributionSpec::superbunched(4.0)).unwrap();
    // analytic sup |F_th − F_sb| = 0.16405
    assert!(
        other.statistic > 0.05 && (other.statistic - 0.16405).abs() < 0.005,
        "{}",
        other.statistic
    );
    assert!(other.p_bound < 1e-12);
    let empirical = empirical_ccdf(&t).unwrap();
    assert!(empirical
        .points()
        .iter()
        .step_by(97)
        .all(|p| (p.survival - (-p.value / 4.0).exp()).abs() <= 0.005));
}

#[test]
fn bootstrap_error_shrinks_as_root_n() {
    let small = empirical_gm(
        &sample(&DistributionSpec::thermal(1.0), 10_000, 218).unwrap(),
        2,
    )
    .unwrap();
    let large = empirical_gm(
        &sample(&DistributionSpec::thermal(1.0), 1_000_000, 219).unwrap(),
        2,
    )
    .unwrap();
    let ratio = small.stderr.unwrap() / large.stderr.unwrap();
    assert!((ratio / 10.0 - 1.0).abs() < 0.2, "{ratio}");
    assert_eq!(large.resamples, 200);
}

#[test]
fn correlation_functions_of_bsv() {
    let sb = sample(&DistributionSpec::superbunched(1.0), 10_000_000, 220).unwrap();
    let g = empirical_gm(&sb, 2).unwrap();
    assert!((g.value - 3.0).abs() < 0.02, "{g:?}");
    let shg = sample(
        &DistributionSpec::superbunched(1.0).with_harmonic(2, 1.0),
        10_000_000,
        221,
    )
    .unwrap();
    let g = empirical_gm(&shg, 2).unwrap();
    assert!((g.value - 105.0 / 9.0).abs() < 0.6, "{g:?}");
}

#[test]
fn log_histogram_follows_the_exponential() {
    let m = 1.0e3;
    let n = 1_000_000;
    let spec = DistributionSpec::thermal(m);
    let t = sample(&spec, n, 222).unwrap();
    let h = empirical_histogram(&t, &HistogramSpec::logarithmic(1.0, 1.2e4, 5)).unwrap();
    for b in h.bins.iter().filter(|b| b.count > 0) {
        let p = ccdf(&spec, b.lo).unwrap() - ccdf(&spec, b.hi).unwrap();
        let expect = n as f64 * p;
        assert!(
            (b.count as f64 - expect).abs() <= 3.0 * expect.sqrt().max(1.0),
            "{b:?} vs {expect}"
        );
    }
}
