mod common;

use chrono::Days;
use collectivity::corr::correlation_matrix;
use collectivity::marketdata::{align_calendars, compute_returns, shift_returns, AlignPolicy, PriceSeries};
use collectivity::rpa::{solve_numeric, SchematicRpaModel};
use collectivity::spectral::eigendecompose;
use collectivity::weierstrass::{renewal_residual, weierstrass_p, WeierstrassParams};
use common::{dates, panel, start_date};
use ndarray::Array2;
use proptest::prelude::*;

fn matrix(n: usize, t: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * t).prop_map(move |v| Array2::from_shape_vec((n, t), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_returns_sum_to_the_total_move(prices in prop::collection::vec(0.5f64..200.0, 3..60)) {
        let obs = dates(prices.len()).into_iter().zip(prices.iter().copied()).collect();
        let series = PriceSeries::new("P", obs).unwrap();
        let r = compute_returns(&[series], 1).unwrap();
        let total: f64 = r[0].returns.iter().sum();
        let exact = (prices[prices.len() - 1] / prices[0]).ln();
        prop_assert!((total - exact).abs() < 1e-10);
    }

    #[test]
    fn aligned_dates_belong_to_every_asset(
        gaps in prop::collection::vec(prop::collection::vec(any::<bool>(), 40), 2..5),
    ) {
        let series: Vec<PriceSeries> = gaps
            .iter()
            .enumerate()
            .map(|(a, keep)| {
                let mut obs: Vec<_> = keep
                    .iter()
                    .enumerate()
                    .filter(|(i, k)| **k || *i < 2)
                    .map(|(i, _)| (start_date() + Days::new(i as u64), 1.0 + i as f64 + a as f64))
                    .collect();
                obs.push((start_date() + Days::new(100), 5.0));
                PriceSeries::new(format!("S{a}"), obs).unwrap()
            })
            .collect();
        let returns = compute_returns(&series, 1).unwrap();
        let (panel, report) = align_calendars(&returns, AlignPolicy::default()).unwrap();
        prop_assert!(report.dropped_assets.is_empty());
        for r in &returns {
            for d in &panel.dates {
                prop_assert!(r.dates.contains(d));
            }
        }
        for w in panel.dates.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn shifts_compose(r in matrix(3, 20), a in 0i64..6, b in 0i64..6) {
        let p = panel("S", r);
        let tagged = vec!["S0".to_string(), "S2".to_string()];
        let twice = shift_returns(&shift_returns(&p, &tagged, a).unwrap(), &tagged, b).unwrap();
        let once = shift_returns(&p, &tagged, a + b).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn correlation_ignores_affine_rescaling(r in matrix(4, 25), scale in 0.1f64..10.0, offset in -5.0f64..5.0) {
        let c = correlation_matrix(&panel("S", r.clone()), 0..25);
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        let mut s = r;
        s.row_mut(1).mapv_inplace(|v| scale * v + offset);
        let d = correlation_matrix(&panel("S", s), 0..25).unwrap();
        for (x, y) in c.entries.iter().zip(d.entries.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn correlation_follows_asset_permutation(r in matrix(5, 30), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let c = correlation_matrix(&panel("S", r.clone()), 0..30).unwrap();
        let permuted = Array2::from_shape_fn((5, 30), |(i, t)| r[[perm[i], t]]);
        let d = correlation_matrix(&panel("S", permuted), 0..30).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                prop_assert!((d.entries[[i, j]] - c.entries[[perm[i], perm[j]]]).abs() < 1e-12);
            }
        }
        let ec = eigendecompose(&c).unwrap().eigenvalues;
        let ed = eigendecompose(&d).unwrap().eigenvalues;
        for (x, y) in ec.iter().zip(&ed) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectra_have_trace_n_and_orthonormal_vectors(r in matrix(8, 12)) {
        let c = correlation_matrix(&panel("S", r), 0..12).unwrap();
        for v in c.entries.iter() {
            prop_assert!((-1.0..=1.0).contains(v));
        }
        let spec = eigendecompose(&c).unwrap();
        prop_assert!((spec.eigenvalues.iter().sum::<f64>() - 8.0).abs() < 1e-9);
        prop_assert!(spec.eigenvalues.iter().all(|&l| l > -1e-10));
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let gram = spec.eigenvectors.t().dot(&spec.eigenvectors);
        for i in 0..8 {
            for j in 0..8 {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[[i, j]] - target).abs() < 1e-10);
            }
        }
        let rebuilt = spec.eigenvectors.dot(&Array2::from_diag(&ndarray::arr1(&spec.eigenvalues))).dot(&spec.eigenvectors.t());
        for (x, y) in rebuilt.iter().zip(c.entries.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rpa_strength_is_conserved(
        eps in -3.0f64..3.0,
        kappa in -2.0f64..2.0,
        d in prop::collection::vec(-1.0f64..1.0, 2..30),
    ) {
        prop_assume!(d.iter().any(|x| x.abs() > 1e-3));
        let model = SchematicRpaModel::new(eps, kappa, d).unwrap();
        let sol = solve_numeric(&model).unwrap();
        prop_assert!((sol.total_strength() - model.total_strength()).abs() < 1e-10);
        prop_assert!(sol.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn characteristic_function_properties(k in -100.0f64..100.0, b in 1.2f64..4.0, m in 1.2f64..10.0) {
        let params = WeierstrassParams::new(1.0, b, m, 1e-12).unwrap();
        let p = weierstrass_p(k, &params).unwrap().value;
        prop_assert!(p.abs() <= 0.5 + 1e-12);
        prop_assert!((p - weierstrass_p(-k, &params).unwrap().value).abs() < 1e-15);
    }

    #[test]
    fn renewal_identity_holds(k in -10.0f64..10.0, b in 1.2f64..4.0, mu in 1.5f64..3.0) {
        let params = WeierstrassParams::new(1.0, b, b.powf(mu), 1e-13).unwrap();
        prop_assert!(renewal_residual(k, &params).unwrap().abs() < 1e-11);
    }
}
