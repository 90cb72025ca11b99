//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Largest tolerated `|a_ij − a_ji|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Eigenvalues (unsorted) and eigenvectors (columns, same order) of a
/// symmetric matrix.
///
/// Sweeps over all off-diagonal pairs with plane rotations until every
/// off-diagonal magnitude falls below `1e-12 · max(1, ‖A‖_F)`.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(Error::InvalidArgument(format!("matrix is {rows}x{cols}, not square")));
    }
    let n = rows;
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = (matrix[[i, j]] - matrix[[j, i]]).abs();
            if !(dev <= SYMMETRY_TOLERANCE) {
                return Err(Error::NotSymmetric { row: i, col: j, deviation: dev });
            }
        }
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }

    // row-major working copy, exactly symmetric
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[[i, j]] + matrix[[j, i]]);
        }
    }
    // row k holds eigenvector k
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let threshold = 1e-12 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut max_off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                max_off = max_off.max(a[p * n + q].abs());
            }
        }
        if max_off < threshold {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            let vectors = Array2::from_shape_fn((n, n), |(i, k)| v[k * n + i]);
            return Ok((values, vectors));
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, n, p, q, c, s, t);
            }
        }
    }
    Err(Error::Numeric(format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")))
}

/// Applies the rotation in the `(p, q)` plane; `p < q`.
#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let apq = a[p * n + q];
    a[p * n + p] -= t * apq;
    a[q * n + q] += t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    // rows p and q, then mirror into the columns
    let (head, tail) = a.split_at_mut(q * n);
    let (row_p, row_q) = (&mut head[p * n..p * n + n], &mut tail[..n]);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let (akp, akq) = (row_p[k], row_q[k]);
        row_p[k] = c * akp - s * akq;
        row_q[k] = s * akp + c * akq;
    }
    for k in 0..n {
        if k != p && k != q {
            a[k * n + p] = a[p * n + k];
            a[k * n + q] = a[q * n + k];
        }
    }
    let (head, tail) = v.split_at_mut(q * n);
    for (x, y) in head[p * n..p * n + n].iter_mut().zip(&mut tail[..n]) {
        let (vp, vq) = (*x, *y);
        *x = c * vp - s * vq;
        *y = s * vp + c * vq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn residual(a: &Array2<f64>, values: &[f64], vectors: &Array2<f64>) -> f64 {
        let mut worst = 0.0_f64;
        for (k, lam) in values.iter().enumerate() {
            let col = vectors.column(k);
            let r = a.dot(&col) - &col.mapv(|x| x * lam);
            worst = worst.max(r.dot(&r).sqrt());
        }
        worst
    }

    #[test]
    fn textbook_three_by_three() {
        let a = array![[2.0, 0.0, 0.0], [0.0, 3.0, 4.0], [0.0, 4.0, 9.0]];
        let (mut values, vectors) = symmetric_eigen(&a).unwrap();
        assert!(residual(&a, &values, &vectors) < 1e-13);
        values.sort_by(f64::total_cmp);
        for (got, want) in values.iter().zip([1.0, 2.0, 11.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let a = array![[1.0, 0.5], [0.4, 1.0]];
        assert!(matches!(symmetric_eigen(&a), Err(Error::NotSymmetric { .. })));
        let b = Array2::<f64>::zeros((2, 3));
        assert!(symmetric_eigen(&b).is_err());
    }

    #[test]
    fn diagonal_input_needs_no_rotation() {
        let a = Array2::from_diag(&ndarray::arr1(&[3.0, -1.0, 2.0]));
        let (values, vectors) = symmetric_eigen(&a).unwrap();
        assert_eq!(values, vec![3.0, -1.0, 2.0]);
        assert_eq!(vectors, Array2::eye(3));
    }
}
