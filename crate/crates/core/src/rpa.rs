//! Schematic particle-hole model with a separable interaction.
//!
//! `N` degenerate configurations at energy `ε` couple through
//! `H = ε·I + κ·d dᵀ`. The coupling only acts along `d`, so exactly one
//! state moves, to `ε + κ|d|²`, and it carries the whole transition
//! strength `|d|²`; the `N − 1` states orthogonal to `d` stay at `ε` with
//! zero strength. A repulsive coupling (`κ > 0`) pushes the coherent state
//! up, an attractive one pulls it down.
//!
//! This is the single-block (Tamm–Dancoff) form of the schematic model; it
//! carries the full collective content of the degenerate case.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::symmetric_eigen;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchematicRpaModel {
    epsilon: f64,
    kappa: f64,
    d: Vec<f64>,
}

impl SchematicRpaModel {
    pub fn new(epsilon: f64, kappa: f64, d: Vec<f64>) -> Result<Self> {
        if d.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "schematic model needs at least 2 configurations, got {}",
                d.len()
            )));
        }
        if d.iter().all(|x| *x == 0.0) {
            return Err(Error::InvalidArgument("transition amplitudes are all zero".into()));
        }
        if !epsilon.is_finite() || !kappa.is_finite() || d.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        Ok(Self { epsilon, kappa, d })
    }

    /// `n` configurations with equal amplitudes `d_i = amplitude`.
    pub fn uniform(epsilon: f64, kappa: f64, n: usize, amplitude: f64) -> Result<Self> {
        Self::new(epsilon, kappa, vec![amplitude; n])
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// `Σ d_i²`, the total transition strength.
    pub fn total_strength(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum()
    }

    /// Energy of the coherent state.
    pub fn collective_energy(&self) -> f64 {
        self.epsilon + self.kappa * self.total_strength()
    }
}

/// Energies with the transition strength `B` of each state, ordered by
/// ascending energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpaSolution {
    pub energies: Vec<f64>,
    pub strengths: Vec<f64>,
}

impl RpaSolution {
    fn sorted(pairs: Vec<(f64, f64)>) -> Self {
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            energies: pairs.iter().map(|p| p.0).collect(),
            strengths: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn total_strength(&self) -> f64 {
        self.strengths.iter().sum()
    }
}

/// `H_ij = ε δ_ij + κ d_i d_j`.
pub fn build_hamiltonian(model: &SchematicRpaModel) -> Array2<f64> {
    let d = &model.d;
    let n = d.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let diag = if i == j { model.epsilon } else { 0.0 };
        diag + model.kappa * d[i] * d[j]
    })
}

/// Closed-form solution. Without interaction the unperturbed states keep
/// their individual strengths `d_i²`.
pub fn solve_analytic(model: &SchematicRpaModel) -> RpaSolution {
    if model.kappa == 0.0 {
        return RpaSolution::sorted(model.d.iter().map(|x| (model.epsilon, x * x)).collect());
    }
    let mut pairs = vec![(model.collective_energy(), model.total_strength())];
    pairs.extend(std::iter::repeat_n((model.epsilon, 0.0), model.n() - 1));
    RpaSolution::sorted(pairs)
}

/// Diagonalizes [`build_hamiltonian`]; the strength of state `k` is
/// `(v_k · d)²`.
pub fn solve_numeric(model: &SchematicRpaModel) -> Result<RpaSolution> {
    let h = build_hamiltonian(model);
    let (energies, vectors) = symmetric_eigen(&h)?;
    let d = Array1::from(model.d.clone());
    let pairs = energies
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let overlap = vectors.column(k).dot(&d);
            (e, overlap * overlap)
        })
        .collect();
    Ok(RpaSolution::sorted(pairs))
}

/// Eigenvector of the state carrying the largest strength.
pub fn collective_vector(model: &SchematicRpaModel) -> Result<Vec<f64>> {
    let h = build_hamiltonian(model);
    let (_, vectors) = symmetric_eigen(&h)?;
    let d = Array1::from(model.d.clone());
    let best = (0..model.n())
        .max_by(|&a, &b| {
            let sa = vectors.column(a).dot(&d).abs();
            let sb = vectors.column(b).dot(&d).abs();
            sa.total_cmp(&sb)
        })
        .unwrap_or(0);
    Ok(vectors.column(best).to_vec())
}

/// Rows `(energy, strength, panel)` for the unperturbed configurations
/// (`"unperturbed"`) and the interacting solution (`"rpa"`).
pub fn two_panel_rows(model: &SchematicRpaModel) -> Result<Vec<(f64, f64, &'static str)>> {
    let mut rows: Vec<(f64, f64, &'static str)> =
        model.d.iter().map(|x| (model.epsilon, x * x, "unperturbed")).collect();
    let sol = solve_numeric(model)?;
    rows.extend(sol.energies.iter().zip(&sol.strengths).map(|(e, s)| (*e, *s, "rpa")));
    Ok(rows)
}
