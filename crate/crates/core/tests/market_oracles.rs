mod common;

use collectivity::corr::{correlation_matrix, global_correlation, rolling_correlation};
use collectivity::spectral::{
    collectivity_metrics, eigendecompose, spacing_statistics, spectrum_trace, EigenSpectrum, SpacingConfig,
};
use common::*;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn two_asset_correlation_within_sampling_error() {
    let t = 2000;
    for (seed, rho) in [(1u64, 0.3), (2, -0.6), (3, 0.9)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = white_noise(&mut rng, 2, t);
        let mut r = z.clone();
        for s in 0..t {
            r[[1, s]] = rho * z[[0, s]] + (1.0 - rho * rho).sqrt() * z[[1, s]];
        }
        let c = correlation_matrix(&panel("X", r), 0..t).unwrap();
        let se = (1.0 - rho * rho) / (t as f64).sqrt();
        assert!((c.entries[[0, 1]] - rho).abs() < 3.0 * se, "ρ={rho}: {}", c.entries[[0, 1]]);
    }
}

#[test]
fn white_noise_entries_are_small() {
    let (n, t) = (20, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = correlation_matrix(&panel("W", white_noise(&mut rng, n, t)), 0..t).unwrap();
    let bound = 3.0 / (t as f64).sqrt();
    let mut large = 0;
    for i in 0..n {
        for j in 0..i {
            let v = c.entries[[i, j]];
            assert!(v.abs() < 5.0 / (t as f64).sqrt());
            if v.abs() > bound {
                large += 1;
            }
        }
    }
    assert!(large <= 3, "{large} entries beyond 3/√T");
}

#[test]
fn lagged_copy_is_perfectly_correlated_after_the_shift() {
    let t = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = white_noise(&mut rng, 3, t + 1);
    let b = Array2::from_shape_fn((3, t + 1), |(i, s)| if s == 0 { 0.0 } else { a[[i, s - 1]] });
    let (pa, pb) = (panel("A", a), panel("B", b));
    let c = global_correlation(&pa, &pb, 0..t, 1).unwrap();
    for i in 0..3 {
        assert!((c.entries[[i, 3 + i]] - 1.0).abs() < 1e-12);
    }
    let c0 = global_correlation(&pa, &pb, 0..t, 0).unwrap();
    for i in 0..3 {
        assert!(c0.entries[[i, 3 + i]].abs() < 0.35);
    }
}

#[test]
fn one_factor_leading_eigenvalue_matches_theory() {
    let (n, t, beta) = (30, 300, 0.8);
    let rho = beta * beta;
    let expected = 1.0 + (n as f64 - 1.0) * rho;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let samples = 40;
    let mean: f64 = (0..samples)
        .map(|_| {
            let c = correlation_matrix(&panel("F", one_factor(&mut rng, &vec![beta; n], t)), 0..t).unwrap();
            eigendecompose(&c).unwrap().eigenvalues[0]
        })
        .sum::<f64>()
        / samples as f64;
    assert!((mean - expected).abs() < 0.1 * expected, "{mean} vs {expected}");
}

#[test]
fn leading_eigenvalue_tracks_a_ramping_factor() {
    let (n, window, blocks) = (20, 60, 15);
    let t = window * blocks;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut r = Array2::zeros((n, t));
    for s in 0..t {
        // factor weight ramps from 0 to 0.9 across the sample
        let beta: f64 = 0.9 * s as f64 / (t - 1) as f64;
        let f: f64 = rng.sample(StandardNormal);
        for i in 0..n {
            let e: f64 = rng.sample(StandardNormal);
            r[[i, s]] = beta * f + (1.0 - beta * beta).sqrt() * e;
        }
    }
    let trace = spectrum_trace(&rolling_correlation(&panel("R", r), window, window).unwrap()).unwrap();
    let lambda1: Vec<f64> = trace.points.iter().map(|p| p.eigenvalues[0]).collect();
    let time: Vec<f64> = (0..lambda1.len()).map(|i| i as f64).collect();
    assert!(spearman(&time, &lambda1) > 0.9, "{lambda1:?}");
}

#[test]
fn collective_mode_dominates_with_uniform_loadings() {
    let (n, t) = (30, 250);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = correlation_matrix(&panel("U", one_factor(&mut rng, &vec![0.75f64.sqrt(); n], t)), 0..t).unwrap();
    let spec = eigendecompose(&c).unwrap();
    let m = collectivity_metrics(&spec).unwrap();
    assert!(m.dominance >= 0.5, "{m:?}");
    assert!(m.participation_ratio > 0.9 * n as f64);
    let v = spec.vector(0);
    assert!(v.iter().all(|&x| x > 0.0));
}

fn goe<R: Rng>(rng: &mut R, n: usize) -> Array2<f64> {
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        h[[i, i]] = rng.sample::<f64, _>(StandardNormal) * 2f64.sqrt();
        for j in 0..i {
            let v: f64 = rng.sample(StandardNormal);
            h[[i, j]] = v;
            h[[j, i]] = v;
        }
    }
    h
}

#[test]
fn goe_levels_repel_and_uncorrelated_levels_do_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let config = SpacingConfig { drop_top: 0, ..SpacingConfig::default() };
    let goe_spectra: Vec<Vec<f64>> = (0..10)
        .map(|_| {
            // central half of the semicircle, where a degree-5 unfolding is adequate
            let ev = EigenSpectrum::of_symmetric(&goe(&mut rng, 80)).unwrap().eigenvalues;
            ev[20..60].to_vec()
        })
        .collect();
    let stats = spacing_statistics(&goe_spectra, &config).unwrap();
    assert!(stats.closer_to_wigner(), "{} vs {}", stats.ks_wigner, stats.ks_poisson);
    assert!(stats.ks_wigner < 0.1);

    let poisson_spectra: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..40).map(|_| rng.random::<f64>()).collect())
        .collect();
    let stats = spacing_statistics(&poisson_spectra, &config).unwrap();
    assert!(!stats.closer_to_wigner(), "{} vs {}", stats.ks_wigner, stats.ks_poisson);
}
