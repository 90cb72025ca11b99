//! Small dense helpers shared by the fitting code.

/// Accumulated normal equations `XᵀX β = Xᵀy` for a least-squares problem
/// with `P` columns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormalEquations<const P: usize> {
    pub xtx: [[f64; P]; P],
    pub xty: [f64; P],
    pub yty: f64,
}

impl<const P: usize> Default for NormalEquations<P> {
    fn default() -> Self {
        Self {
            xtx: [[0.0; P]; P],
            xty: [0.0; P],
            yty: 0.0,
        }
    }
}

impl<const P: usize> NormalEquations<P> {
    #[inline]
    pub fn add(&mut self, row: &[f64; P], y: f64) {
        for i in 0..P {
            let ri = row[i];
            self.xty[i] += ri * y;
            for j in i..P {
                self.xtx[i][j] += ri * row[j];
            }
        }
        self.yty += y * y;
    }

    fn full(&self) -> [[f64; P]; P] {
        let mut a = self.xtx;
        for i in 0..P {
            for j in 0..i {
                a[i][j] = a[j][i];
            }
        }
        a
    }

    /// Solves by Cholesky. Returns `None` when the system is numerically
    /// rank deficient (a pivot falls below `1e-12` of its diagonal entry).
    pub fn solve(&self) -> Option<Solution<P>> {
        let a = self.full();
        let l = cholesky(&a)?;
        let beta = cholesky_solve(&l, &self.xty);
        // sse = yᵀy − βᵀXᵀy holds at the least-squares optimum
        let mut fitted = 0.0;
        for i in 0..P {
            fitted += beta[i] * self.xty[i];
        }
        let sse = (self.yty - fitted).max(0.0);
        Some(Solution { beta, sse, chol: l })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Solution<const P: usize> {
    pub beta: [f64; P],
    pub sse: f64,
    chol: [[f64; P]; P],
}

impl<const P: usize> Solution<P> {
    /// `(XᵀX)⁻¹`, the unscaled parameter covariance.
    pub fn inverse_gram(&self) -> [[f64; P]; P] {
        let mut inv = [[0.0; P]; P];
        for k in 0..P {
            let mut e = [0.0; P];
            e[k] = 1.0;
            let col = cholesky_solve(&self.chol, &e);
            for i in 0..P {
                inv[i][k] = col[i];
            }
        }
        inv
    }
}

fn cholesky<const P: usize>(a: &[[f64; P]; P]) -> Option<[[f64; P]; P]> {
    let mut l = [[0.0; P]; P];
    for j in 0..P {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 1e-12 * a[j][j].abs()) || a[j][j] <= 0.0 {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in (j + 1)..P {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    Some(l)
}

fn cholesky_solve<const P: usize>(l: &[[f64; P]; P], b: &[f64; P]) -> [f64; P] {
    let mut z = [0.0; P];
    for i in 0..P {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    let mut x = [0.0; P];
    for i in (0..P).rev() {
        let mut s = z[i];
        for k in (i + 1)..P {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Least-squares fit of `y` on the columns of `design` (column major, each
/// of length `y.len()`), solved by Householder QR. Returns `None` if the
/// design is rank deficient.
pub(crate) fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let p = design.len();
    if p == 0 || n < p || design.iter().any(|c| c.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<f64>> = design.to_vec();
    let mut rhs = y.to_vec();
    let scale = a
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    for k in 0..p {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-13 * scale {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[k..]).map(|(x, y)| x * y).sum();
        let f = 2.0 * dot / vnorm2;
        for (c, vi) in rhs[k..].iter_mut().zip(&v) {
            *c -= f * vi;
        }
    }
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..p {
            s -= a[j][i] * beta[j];
        }
        if a[i][i].abs() <= 1e-13 * scale {
            return None;
        }
        beta[i] = s / a[i][i];
    }
    Some(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_equations_recover_exact_line() {
        let mut ne = NormalEquations::<2>::default();
        for i in 0..10 {
            let x = i as f64;
            ne.add(&[1.0, x], 3.0 - 0.5 * x);
        }
        let sol = ne.solve().unwrap();
        assert!((sol.beta[0] - 3.0).abs() < 1e-12);
        assert!((sol.beta[1] + 0.5).abs() < 1e-12);
        assert!(sol.sse < 1e-12);
        let inv = sol.inverse_gram();
        // (XᵀX)⁻¹ for x = 0..9: det = 10·285 − 45² = 825
        assert!((inv[0][0] - 285.0 / 825.0).abs() < 1e-12);
        assert!((inv[0][1] + 45.0 / 825.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_are_rejected() {
        let mut ne = NormalEquations::<2>::default();
        for i in 0..5 {
            ne.add(&[1.0, 2.0], i as f64);
        }
        assert!(ne.solve().is_none());
    }

    #[test]
    fn qr_least_squares_matches_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let y: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x - 3.0 * x * x).collect();
        let design = vec![
            vec![1.0; 20],
            xs.clone(),
            xs.iter().map(|x| x * x).collect(),
        ];
        let beta = least_squares(&design, &y).unwrap();
        for (b, e) in beta.iter().zip([1.0, 2.0, -3.0]) {
            assert!((b - e).abs() < 1e-10);
        }
        let degenerate = vec![xs.clone(), xs.clone()];
        assert!(least_squares(&degenerate, &y).is_none());
    }
}
