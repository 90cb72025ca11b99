//! Two-stage least-squares fit of the log-periodic model.
//!
//! For fixed `(T_c, λ, α)` the model is linear in the amplitudes. The cosine
//! variant uses `B cos(θ + φ) = B_c cos θ − B_s sin θ`, so each grid node is
//! a 3-column linear problem; the modulus variant scans `φ` on a fixed grid
//! and solves for `(A, B ≥ 0)`. The best node then seeds a pattern search
//! over the nonlinear parameters, with the amplitudes re-solved at every
//! evaluation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Direction, LogPeriodicModel, Variant};
use crate::error::{Error, Result};
use crate::linalg::NormalEquations;

/// Evenly spaced nodes from `start` to `end` inclusive. A single node pins
/// the parameter at `start` during refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub nodes: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, nodes: usize) -> Self {
        Self { start, end, nodes }
    }

    pub fn fixed(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        match self.nodes {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.nodes > 1 {
            (self.end - self.start).abs() / (self.nodes - 1) as f64
        } else {
            0.0
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.nodes == 0 || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} grid must have finite bounds and at least one node")));
        }
        Ok(())
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// `start:end:nodes`, or a single number for a pinned value.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("grid {s:?} is not start:end:nodes"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Grid::fixed(v.trim().parse().map_err(|_| bad())?)),
            [a, b, n] => Ok(Grid::new(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                n.trim().parse().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Candidate critical times; `None` derives the default from the data
    /// (`[last, last + 2·span]` for bubbles, mirrored for antibubbles,
    /// 200 nodes).
    pub t_c_grid: Option<Grid>,
    pub lambda_grid: Grid,
    pub alpha_grid: Grid,
    pub variant: Variant,
    pub direction: Direction,
    /// Phase nodes scanned for the modulus variant.
    pub phase_nodes: usize,
    pub max_iterations: usize,
    /// Relative sse improvement below which the search step is shrunk.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            t_c_grid: None,
            lambda_grid: Grid::new(1.5, 3.5, 41),
            alpha_grid: Grid::new(-1.0, 1.0, 21),
            variant: Variant::Cosine,
            direction: Direction::Bubble,
            phase_nodes: 64,
            max_iterations: 500,
            tolerance: 1e-8,
        }
    }
}

impl FitConfig {
    pub fn default_t_c_grid(times: &[f64], direction: Direction) -> Grid {
        let (first, last) = times
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        let span = last - first;
        match direction {
            Direction::Bubble => Grid::new(last, last + 2.0 * span, 200),
            Direction::Antibubble => Grid::new(first - 2.0 * span, first, 200),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub grid_nodes_evaluated: usize,
    /// `T_c` nodes dropped because some point lay on the wrong side.
    pub t_c_nodes_clipped: usize,
    /// Nodes skipped because the linear subproblem was rank deficient.
    pub degenerate_nodes: usize,
    pub grid_best_sse: f64,
    pub refinement_iterations: usize,
    pub refinement_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpplFitResult {
    pub model: LogPeriodicModel,
    pub sse: f64,
    pub n_points: usize,
    /// Standard error of `B` from the final linear subproblem.
    pub b_std_error: f64,
    pub diagnostics: FitDiagnostics,
}

impl LpplFitResult {
    pub fn omega(&self) -> f64 {
        self.model.omega()
    }

    pub fn mean_squared_error(&self) -> f64 {
        self.sse / self.n_points as f64
    }
}

/// Amplitudes solved at one point of the nonlinear parameter space.
#[derive(Debug, Clone, Copy)]
struct Linear {
    a: f64,
    b: f64,
    phi: f64,
    sse: f64,
    b_std_error: f64,
}

/// Nonlinear coordinates: `[t_c, λ, α, φ]` (φ only moves for `|cos|`).
type Point = [f64; 4];

struct Problem<'a> {
    times: &'a [f64],
    values: &'a [f64],
    direction: Direction,
    /// When set, distances are fixed and `t_c` is ignored.
    known_ln_x: Option<&'a [f64]>,
    variant: Variant,
}

impl Problem<'_> {
    fn ln_distances(&self, t_c: f64) -> Option<Vec<f64>> {
        if let Some(ln_x) = self.known_ln_x {
            return Some(ln_x.to_vec());
        }
        self.times
            .iter()
            .map(|&t| self.direction.distance(t, t_c).map(f64::ln))
            .collect()
    }

    fn solve(&self, p: &Point) -> Option<Linear> {
        let [t_c, lambda, alpha, phi] = *p;
        if !(lambda > 1.0) || !alpha.is_finite() {
            return None;
        }
        let ln_x = self.ln_distances(t_c)?;
        let omega = 2.0 * PI / lambda.ln();
        let n = self.values.len();
        match self.variant {
            Variant::Cosine => {
                let mut ne = NormalEquations::<3>::default();
                for (lx, &y) in ln_x.iter().zip(self.values) {
                    let w = (alpha * lx).exp();
                    let (s, c) = (omega * lx).sin_cos();
                    ne.add(&[w, w * c, w * s], y);
                }
                let sol = ne.solve()?;
                let [a, bc, bs] = sol.beta;
                let sse = residual_sse(&ln_x, self.values, |lx| {
                    let w = (alpha * lx).exp();
                    let (s, c) = (omega * lx).sin_cos();
                    a * w + bc * w * c + bs * w * s
                });
                // B cos(θ + φ) = B cos φ cos θ − B sin φ sin θ
                let b = bc.hypot(bs);
                let phi = (-bs).atan2(bc).rem_euclid(2.0 * PI);
                let cov = sol.inverse_gram();
                let var = sse / dof(n, 6);
                let b_var = if b > 0.0 {
                    (bc * bc * cov[1][1] + bs * bs * cov[2][2] + 2.0 * bc * bs * cov[1][2]) / (b * b)
                } else {
                    cov[1][1].max(cov[2][2])
                };
                Some(Linear { a, b, phi, sse, b_std_error: (var * b_var).sqrt() })
            }
            Variant::AbsCosine => {
                let mut ne = NormalEquations::<2>::default();
                for (lx, &y) in ln_x.iter().zip(self.values) {
                    let w = (alpha * lx).exp();
                    ne.add(&[w, w * (omega * lx + phi).cos().abs()], y);
                }
                let phi = phi.rem_euclid(PI);
                let mut lin = abs_cosine_amplitudes(&ne, n, phi)?;
                lin.sse = residual_sse(&ln_x, self.values, |lx| {
                    let w = (alpha * lx).exp();
                    w * (lin.a + lin.b * (omega * lx + phi).cos().abs())
                });
                Some(lin)
            }
        }
    }
}

/// Exact residual sum of squares; the normal-equation shortcut loses
/// digits to cancellation once the fit is nearly exact.
fn residual_sse(ln_x: &[f64], values: &[f64], model: impl Fn(f64) -> f64) -> f64 {
    ln_x.iter().zip(values).map(|(&lx, &y)| (y - model(lx)).powi(2)).sum()
}

fn dof(n: usize, params: usize) -> f64 {
    n.saturating_sub(params).max(1) as f64
}

fn abs_cosine_amplitudes(ne: &NormalEquations<2>, n: usize, phi: f64) -> Option<Linear> {
    let sol = ne.solve()?;
    let [a, b] = sol.beta;
    let cov = sol.inverse_gram();
    let b_se = ((sol.sse / dof(n, 6)).max(0.0) * cov[1][1]).sqrt();
    if b >= 0.0 {
        return Some(Linear { a, b, phi, sse: sol.sse, b_std_error: b_se });
    }
    // B ≥ 0 active: power law alone
    let (ww, wy) = (ne.xtx[0][0], ne.xty[0]);
    if !(ww > 0.0) {
        return None;
    }
    let a = wy / ww;
    Some(Linear {
        a,
        b: 0.0,
        phi,
        sse: (ne.yty - a * wy).max(0.0),
        b_std_error: b_se,
    })
}

#[derive(Debug, Clone, Copy)]
struct NodeBest {
    point: Point,
    sse: f64,
}

#[derive(Default)]
struct NodeStats {
    evaluated: usize,
    degenerate: usize,
}

/// Scans all (λ, α, φ) nodes for one set of log-distances.
fn scan_t_c(
    problem: &Problem<'_>,
    t_c: f64,
    ln_x: &[f64],
    lambdas: &[f64],
    alphas: &[f64],
    phases: &[f64],
) -> (Option<NodeBest>, NodeStats) {
    let y = problem.values;
    let n = y.len();
    let powers: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&al| ln_x.iter().map(|lx| (al * lx).exp()).collect())
        .collect();
    let mut best: Option<NodeBest> = None;
    let mut stats = NodeStats::default();
    let mut consider = |point: Point, sse: Option<f64>, stats: &mut NodeStats| {
        stats.evaluated += 1;
        match sse {
            Some(sse) if sse.is_finite() => {
                if best.is_none_or(|b| sse < b.sse) {
                    best = Some(NodeBest { point, sse });
                }
            }
            _ => stats.degenerate += 1,
        }
    };
    let mut osc = vec![0.0; n];
    let mut osc2 = vec![0.0; n];
    for &lambda in lambdas {
        let omega = 2.0 * PI / lambda.ln();
        match problem.variant {
            Variant::Cosine => {
                for (i, lx) in ln_x.iter().enumerate() {
                    let (s, c) = (omega * lx).sin_cos();
                    osc[i] = c;
                    osc2[i] = s;
                }
                for (ai, &alpha) in alphas.iter().enumerate() {
                    let w = &powers[ai];
                    let mut ne = NormalEquations::<3>::default();
                    for i in 0..n {
                        ne.add(&[w[i], w[i] * osc[i], w[i] * osc2[i]], y[i]);
                    }
                    let sse = ne.solve().map(|s| s.sse);
                    consider([t_c, lambda, alpha, 0.0], sse, &mut stats);
                }
            }
            Variant::AbsCosine => {
                for &phi in phases {
                    for (i, lx) in ln_x.iter().enumerate() {
                        osc[i] = (omega * lx + phi).cos().abs();
                    }
                    for (ai, &alpha) in alphas.iter().enumerate() {
                        let w = &powers[ai];
                        let mut ne = NormalEquations::<2>::default();
                        for i in 0..n {
                            ne.add(&[w[i], w[i] * osc[i]], y[i]);
                        }
                        let sse = abs_cosine_amplitudes(&ne, n, phi).map(|l| l.sse);
                        consider([t_c, lambda, alpha, phi], sse, &mut stats);
                    }
                }
            }
        }
    }
    (best, stats)
}

/// Pattern search (exploratory coordinate moves plus pattern steps) with
/// step halving. Coordinates with a zero step stay fixed.
fn refine(
    problem: &Problem<'_>,
    start: Point,
    start_sse: f64,
    steps: Point,
    max_iterations: usize,
    tolerance: f64,
) -> (Point, f64, usize, usize) {
    let mut evaluations = 0usize;
    let mut objective = |p: &Point| -> f64 {
        evaluations += 1;
        problem.solve(p).map_or(f64::INFINITY, |l| l.sse)
    };
    let explore = |base: Point, base_sse: f64, step: &Point, f: &mut dyn FnMut(&Point) -> f64| {
        let (mut point, mut sse) = (base, base_sse);
        for k in 0..4 {
            if step[k] == 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                let mut trial = point;
                trial[k] += dir * step[k];
                let s = f(&trial);
                if s < sse {
                    point = trial;
                    sse = s;
                    break;
                }
            }
        }
        (point, sse)
    };

    let (mut base, mut base_sse) = (start, start_sse);
    let mut step = steps;
    let mut iterations = 0;
    while iterations < max_iterations && base_sse > 0.0 {
        iterations += 1;
        let (trial, trial_sse) = explore(base, base_sse, &step, &mut objective);
        if trial_sse < base_sse {
            let gain = (base_sse - trial_sse) / base_sse;
            let mut prev = base;
            base = trial;
            base_sse = trial_sse;
            // keep moving along the improving direction while it pays off
            while iterations < max_iterations {
                let mut pattern = base;
                for k in 0..4 {
                    pattern[k] += base[k] - prev[k];
                }
                let pattern_sse = objective(&pattern);
                let (next, next_sse) = explore(pattern, pattern_sse, &step, &mut objective);
                if next_sse < base_sse {
                    iterations += 1;
                    prev = base;
                    base = next;
                    base_sse = next_sse;
                } else {
                    break;
                }
            }
            if gain >= tolerance {
                continue;
            }
        }
        let mut all_tiny = true;
        for k in 0..4 {
            step[k] *= 0.5;
            if step[k] > 1e-12 * steps[k] {
                all_tiny = false;
            }
        }
        if all_tiny {
            break;
        }
    }
    (base, base_sse, iterations, evaluations)
}

/// Shared two-stage search. `t_c_values` is ignored for fixed distances.
fn search(
    problem: &Problem<'_>,
    t_c_grid: Grid,
    config: &FitConfig,
) -> Result<(Point, Linear, FitDiagnostics)> {
    config.lambda_grid.validate("lambda")?;
    config.alpha_grid.validate("alpha")?;
    t_c_grid.validate("t_c")?;
    let lambdas: Vec<f64> = config.lambda_grid.values();
    if lambdas.iter().any(|l| !(*l > 1.0)) {
        return Err(Error::InvalidArgument("lambda grid must lie above 1".into()));
    }
    let alphas = config.alpha_grid.values();
    let phase_nodes = match problem.variant {
        Variant::Cosine => 1,
        Variant::AbsCosine => config.phase_nodes.max(1),
    };
    // |cos| has period π
    let phases: Vec<f64> = (0..phase_nodes).map(|i| PI * i as f64 / phase_nodes as f64).collect();

    let t_cs = t_c_grid.values();
    let scans: Vec<Option<(Option<NodeBest>, NodeStats)>> = t_cs
        .par_iter()
        .map(|&t_c| {
            let ln_x = problem.ln_distances(t_c)?;
            Some(scan_t_c(problem, t_c, &ln_x, &lambdas, &alphas, &phases))
        })
        .collect();

    let mut diagnostics = FitDiagnostics::default();
    let mut best: Option<NodeBest> = None;
    for scan in scans {
        match scan {
            None => diagnostics.t_c_nodes_clipped += 1,
            Some((node, stats)) => {
                diagnostics.grid_nodes_evaluated += stats.evaluated;
                diagnostics.degenerate_nodes += stats.degenerate;
                if let Some(node) = node {
                    if best.is_none_or(|b| node.sse < b.sse) {
                        best = Some(node);
                    }
                }
            }
        }
    }
    if diagnostics.t_c_nodes_clipped == t_cs.len() {
        return Err(Error::Insufficient(
            "every critical-time node leaves some point on the wrong side".into(),
        ));
    }
    let best = best.ok_or_else(|| Error::Numeric("every grid node was degenerate".into()))?;
    diagnostics.grid_best_sse = best.sse;

    let steps: Point = [
        if problem.known_ln_x.is_some() { 0.0 } else { t_c_grid.spacing() },
        config.lambda_grid.spacing(),
        config.alpha_grid.spacing(),
        match problem.variant {
            Variant::Cosine => 0.0,
            Variant::AbsCosine => PI / phase_nodes as f64,
        },
    ];
    let (point, _, iterations, evaluations) =
        refine(problem, best.point, best.sse, steps, config.max_iterations, config.tolerance);
    diagnostics.refinement_iterations = iterations;
    diagnostics.refinement_evaluations = evaluations;
    let linear = problem
        .solve(&point)
        .ok_or_else(|| Error::Numeric("refined point has a degenerate linear subproblem".into()))?;
    Ok((point, linear, diagnostics))
}

/// Fits the log-periodic model to `(time, value)` pairs, typically
/// log-prices against days since the start of the series.
pub fn fit_model(series: &[(f64, f64)], config: &FitConfig) -> Result<LpplFitResult> {
    if series.len() < 20 {
        return Err(Error::Insufficient(format!("fit needs at least 20 points, got {}", series.len())));
    }
    if series.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let times: Vec<f64> = series.iter().map(|p| p.0).collect();
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    let problem = Problem {
        times: &times,
        values: &values,
        direction: config.direction,
        known_ln_x: None,
        variant: config.variant,
    };
    let grid = config
        .t_c_grid
        .unwrap_or_else(|| FitConfig::default_t_c_grid(&times, config.direction));
    let (point, linear, diagnostics) = search(&problem, grid, config)?;
    Ok(LpplFitResult {
        model: LogPeriodicModel {
            t_c: point[0],
            alpha: point[2],
            lambda: point[1],
            phi: linear.phi,
            a: linear.a,
            b: linear.b,
            variant: config.variant,
            direction: config.direction,
        },
        sse: linear.sse,
        n_points: series.len(),
        b_std_error: linear.b_std_error,
        diagnostics,
    })
}

/// Result of fitting `A x^α + B x^α osc(ω ln x + φ)` with known `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct KnownDistanceFit {
    pub lambda: f64,
    pub alpha: f64,
    pub phi: f64,
    pub a: f64,
    pub b: f64,
    pub sse: f64,
}

/// Same search with distances supplied directly (no critical time).
pub(crate) fn fit_known_distances(
    distances: &[f64],
    values: &[f64],
    config: &FitConfig,
) -> Result<KnownDistanceFit> {
    if distances.len() != values.len() || distances.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidArgument("distances must be positive and match the values".into()));
    }
    let ln_x: Vec<f64> = distances.iter().map(|x| x.ln()).collect();
    let problem = Problem {
        times: &[],
        values,
        direction: config.direction,
        known_ln_x: Some(&ln_x),
        variant: config.variant,
    };
    let (point, linear, _) = search(&problem, Grid::fixed(0.0), config)?;
    Ok(KnownDistanceFit {
        lambda: point[1],
        alpha: point[2],
        phi: linear.phi,
        a: linear.a,
        b: linear.b,
        sse: linear.sse,
    })
}
