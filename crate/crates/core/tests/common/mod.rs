#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use collectivity::marketdata::ReturnPanel;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).unwrap()
}

pub fn dates(n: usize) -> Vec<NaiveDate> {
    (0..n).map(|i| start_date() + Days::new(i as u64)).collect()
}

/// Panel with assets `prefix0, prefix1, …` on consecutive days.
pub fn panel(prefix: &str, returns: Array2<f64>) -> ReturnPanel {
    let (n, t) = returns.dim();
    ReturnPanel::new((0..n).map(|i| format!("{prefix}{i}")).collect(), dates(t), returns, 1).unwrap()
}

pub fn white_noise<R: Rng>(rng: &mut R, n: usize, t: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, t), || rng.sample(StandardNormal))
}

/// `r_i(t) = β_i f(t) + √(1 − β_i²) e_i(t)` with unit-variance factor and noise.
pub fn one_factor<R: Rng>(rng: &mut R, loadings: &[f64], t: usize) -> Array2<f64> {
    let factor: Vec<f64> = (0..t).map(|_| rng.sample(StandardNormal)).collect();
    Array2::from_shape_fn((loadings.len(), t), |(i, s)| {
        let b = loadings[i];
        b * factor[s] + (1.0 - b * b).sqrt() * rng.sample::<f64, _>(StandardNormal)
    })
}

pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}
