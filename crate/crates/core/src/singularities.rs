//! Jacobian minors, Φ, pointwise regularity and Gauss maps of parametrizations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::linalg::det_laplace;
use crate::map::{jacobian_exact, value_and_jacobian, DifferentiableMap, Formula};

pub const DEFAULT_RANK_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Regular,
    Singular(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub phi_value: f64,
    pub corank: usize,
    pub classification: Classification,
    pub singular_values: Vec<f64>,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.classification == Classification::Regular
    }
}

fn rows_of(j: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..j.nrows()).map(|r| j.row(r).iter().copied().collect()).collect()
}

/// Maximal minors of an (n+1)×n matrix given by rows: `M_k` drops row k.
pub fn minors_of<T: Real>(rows: &[Vec<T>]) -> Vec<T> {
    (0..rows.len())
        .map(|k| {
            let sub: Vec<Vec<T>> =
                rows.iter().enumerate().filter(|(r, _)| *r != k).map(|(_, row)| row.clone()).collect();
            det_laplace(&sub)
        })
        .collect()
}

/// M₁…M_{n+1} of a Jacobian with n+1 rows and n columns.
pub fn minors(j: &DMatrix<f64>) -> Result<Vec<f64>> {
    if j.nrows() != j.ncols() + 1 {
        return Err(Error::DimensionMismatch { expected: j.ncols() + 1, got: j.nrows() });
    }
    Ok(minors_of(&rows_of(j)))
}

/// Φ = Σ M_k².
pub fn phi(j: &DMatrix<f64>) -> Result<f64> {
    Ok(minors(j)?.iter().map(|m| m * m).sum())
}

/// Cofactor vector ((−1)^{k+1} M_k)_k, orthogonal to every column.
pub fn cofactor_vector<T: Real>(rows: &[Vec<T>]) -> Vec<T> {
    minors_of(rows).into_iter().enumerate().map(|(k, m)| if k % 2 == 0 { m } else { -m }).collect()
}

/// Singular values in decreasing order.
pub fn singular_values(j: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = j.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Corank of an m×n matrix (n columns), counting singular values at most
/// `rank_eps` times the largest.
pub fn corank(j: &DMatrix<f64>, rank_eps: f64) -> usize {
    let s = singular_values(j);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = if smax > 0.0 { s.iter().filter(|v| **v > rank_eps * smax).count() } else { 0 };
    j.ncols() - rank
}

pub fn report(j: &DMatrix<f64>, rank_eps: f64) -> Result<RegularityReport> {
    let phi_value = phi(j)?;
    let corank = corank(j, rank_eps);
    let classification = if corank == 0 { Classification::Regular } else { Classification::Singular(corank) };
    Ok(RegularityReport { phi_value, corank, classification, singular_values: singular_values(j) })
}

/// Regularity of a map ℝⁿ → ℝⁿ⁺¹ at x.
pub fn classify(map: &DifferentiableMap, x: &[f64], rank_eps: f64) -> Result<RegularityReport> {
    report(&jacobian_exact(map, x)?, rank_eps)
}

/// Unit normal of a parametrization at a regular point, sign fixed so the
/// largest-magnitude component is positive.
pub fn gauss_from_parametrization(f: &DifferentiableMap, x: &[f64], rank_eps: f64) -> Result<Vec<f64>> {
    let j = jacobian_exact(f, x)?;
    let rep = report(&j, rank_eps)?;
    if !rep.is_regular() {
        return Err(Error::SingularPoint { phi: rep.phi_value });
    }
    let mut c = cofactor_vector(&rows_of(&j));
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let big = c.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
    let s = if big < 0.0 { -1.0 / norm } else { 1.0 / norm };
    c.iter_mut().for_each(|v| *v *= s);
    Ok(c)
}

/// Normalized cofactor vector of a parametrization, in its raw orientation.
/// Undefined (domain error) on the singular set.
pub struct GaussMap {
    pub f: DifferentiableMap,
}

impl Formula for GaussMap {
    fn dim_in(&self) -> usize {
        self.f.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.f.dim_out()
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let (_, jac) = value_and_jacobian(&self.f, x)?;
        let c = cofactor_vector(&jac);
        let mut n2 = T::zero();
        for v in &c {
            n2 += *v * *v;
        }
        if n2.re() == 0.0 {
            return Err(Error::SingularPoint { phi: 0.0 });
        }
        let inv = n2.sqrt().recip();
        Ok(c.into_iter().map(|v| v * inv).collect())
    }
    fn label(&self) -> String {
        format!("gauss({})", self.f.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_minors() {
        let j = DMatrix::from_row_slice(2, 1, &[2.0, 3.0]);
        assert_eq!(minors(&j).unwrap(), vec![3.0, 2.0]);
        assert_eq!(phi(&j).unwrap(), 13.0);
        let z = DMatrix::<f64>::zeros(2, 1);
        assert_eq!(phi(&z).unwrap(), 0.0);
    }

    #[test]
    fn corank_of_rank_one() {
        let j = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.5, 1.0]);
        assert_eq!(corank(&j, 1e-9), 1);
        assert_eq!(corank(&DMatrix::zeros(3, 2), 1e-9), 2);
    }

    #[test]
    fn cofactor_orthogonal() {
        let rows = vec![vec![1.0, 0.3, -2.0], vec![0.0, 1.0, 4.0], vec![2.0, -1.0, 0.5], vec![0.7, 0.7, 0.1]];
        let c = cofactor_vector(&rows);
        for i in 0..3 {
            let d: f64 = (0..4).map(|k| c[k] * rows[k][i]).sum();
            assert!(d.abs() < 1e-13);
        }
    }
}
