//! Small dense linear algebra: LU with partial pivoting, determinants and the
//! coefficient system of the recovery.

use crate::dual::Real;
use crate::error::{Error, Result};

pub const DEFAULT_DET_EPS: f64 = 1e-10;

/// LU factorization with partial pivoting of a square matrix (rows given).
/// Returns the solution of `a·x = b` and det(a).
pub fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if m[p][k] == 0.0 {
            return Ok((vec![f64::NAN; n], 0.0));
        }
        if p != k {
            m.swap(p, k);
            x.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= l * m[k][j];
            }
            x[i] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Ok((x, det))
}

/// Determinant by cofactor expansion; generic so it can run on dual numbers.
/// Intended for the small matrices (n ≤ 4) that occur here.
pub fn det_laplace<T: Real>(m: &[Vec<T>]) -> T {
    match m.len() {
        0 => T::one(),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut s = T::zero();
            for c in 0..n {
                let sub: Vec<Vec<T>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
                    .collect();
                let term = m[0][c] * det_laplace(&sub);
                if c % 2 == 0 {
                    s += term;
                } else {
                    s -= term;
                }
            }
            s
        }
    }
}

/// |det| / ∏ row norms, which lies in [0, 1] by Hadamard's inequality.
pub fn relative_det(a: &[Vec<f64>], det: f64) -> f64 {
    let scale: f64 = a.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).product();
    if scale == 0.0 || !scale.is_finite() {
        0.0
    } else {
        det.abs() / scale
    }
}

/// Solves the coefficient system `dtheta · b = da` where
/// `dtheta[i][j] = ∂θⱼ/∂xᵢ`. Fails with `SingularChart` when the relative
/// determinant is at most `det_eps`.
pub fn solve_coefficients(da: &[f64], dtheta: &[Vec<f64>], det_eps: f64) -> Result<Vec<f64>> {
    let (b, det) = lu_solve(dtheta, da)?;
    let ratio = relative_det(dtheta, det);
    if !(ratio > det_eps) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularChart { ratio });
    }
    Ok(b)
}
