#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collectivity"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let last = text.lines().last().expect("stderr has an error record");
    serde_json::from_str(last).expect("error record is JSON")
}

/// Writes `date,asset,price` rows for prices that start at 100 and follow
/// the given log-return paths on consecutive days.
pub fn write_prices(path: &Path, names: &[String], returns: &[Vec<f64>]) {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let mut text = String::from("date,asset,price\n");
    for (name, path_returns) in names.iter().zip(returns) {
        let mut log_price = 100f64.ln();
        for t in 0..=path_returns.len() {
            let date = start + Days::new(t as u64);
            writeln!(text, "{date},{name},{}", log_price.exp()).unwrap();
            if t < path_returns.len() {
                log_price += path_returns[t];
            }
        }
    }
    std::fs::write(path, text).unwrap();
}

pub fn normals(rng: &mut ChaCha8Rng, t: usize) -> Vec<f64> {
    (0..t).map(|_| rng.sample(StandardNormal)).collect()
}

/// One-factor market with uniform loading `beta` (returns in percent units).
pub fn one_factor(rng: &mut ChaCha8Rng, n: usize, t: usize, beta: f64) -> Vec<Vec<f64>> {
    let f = normals(rng, t);
    (0..n)
        .map(|_| {
            let e = normals(rng, t);
            (0..t).map(|s| 0.01 * (beta * f[s] + (1.0 - beta * beta).sqrt() * e[s])).collect()
        })
        .collect()
}

/// Market B copies market A one day later with the given noise share of
/// the variance: `B_i(t) = √(1−q) A_i(t−1) + √q ε_i(t)`.
pub fn lagged_copy(rng: &mut ChaCha8Rng, a: &[Vec<f64>], noise_share: f64) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| {
            let sd = (row.iter().map(|x| x * x).sum::<f64>() / row.len() as f64).sqrt();
            let e = normals(rng, row.len());
            (0..row.len())
                .map(|s| {
                    let lagged = if s == 0 { 0.0 } else { row[s - 1] };
                    (1.0 - noise_share).sqrt() * lagged + noise_share.sqrt() * sd * e[s]
                })
                .collect()
        })
        .collect()
}

pub struct TwoMarkets {
    pub a: PathBuf,
    pub b: PathBuf,
}

/// Writes the lagged-copy fixture: an 8-asset one-factor market A and its
/// noisy one-day-lagged copy B.
pub fn two_market_fixture(dir: &Path, seed: u64, noise_share: f64) -> TwoMarkets {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = one_factor(&mut rng, 8, 300, 0.5f64.sqrt());
    let b = lagged_copy(&mut rng, &a, noise_share);
    let names = |p: &str| (0..8).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let paths = TwoMarkets { a: dir.join(format!("a{seed}.csv")), b: dir.join(format!("b{seed}.csv")) };
    write_prices(&paths.a, &names("A"), &a);
    write_prices(&paths.b, &names("B"), &b);
    paths
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
