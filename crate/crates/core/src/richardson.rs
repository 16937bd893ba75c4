//! Polynomial extrapolation to a zero step (Neville tableau in s = t^order).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extrapolated value with its error indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: Vec<f64>,
    /// Largest component of |P(all samples) − P(finest samples, one degree lower)|.
    pub error: f64,
}

const RATIO_TOL: f64 = 0.01;

/// Checks that steps are positive and decrease with a fixed ratio (within 1%).
pub fn check_geometric(steps: &[f64]) -> Result<f64> {
    if steps.len() < 3 {
        return Err(Error::InsufficientSamples(steps.len()));
    }
    if steps.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::NonGeometricSteps);
    }
    let r0 = steps[0] / steps[1];
    if r0 <= 1.0 {
        return Err(Error::NonGeometricSteps);
    }
    for w in steps.windows(2) {
        let r = w[0] / w[1];
        if ((r - r0) / r0).abs() > RATIO_TOL {
            return Err(Error::NonGeometricSteps);
        }
    }
    Ok(r0)
}

/// Extrapolates vector samples `(t, v(t))` to t = 0 assuming
/// v(t) = v₀ + c₁ t^order + c₂ t^{2·order} + ….
pub fn richardson_limit(samples: &[(f64, Vec<f64>)], order: u32) -> Result<Extrapolation> {
    let steps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    check_geometric(&steps)?;
    neville(samples, order)
}

/// Same tableau without the geometric-step check; steps must be distinct and
/// positive.
pub fn neville(samples: &[(f64, Vec<f64>)], order: u32) -> Result<Extrapolation> {
    let steps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if steps.len() < 3 {
        return Err(Error::InsufficientSamples(steps.len()));
    }
    if steps.iter().any(|t| !(t.is_finite() && *t > 0.0)) || steps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NonGeometricSteps);
    }
    let m = samples.len();
    let dim = samples[0].1.len();
    if samples.iter().any(|s| s.1.len() != dim) {
        return Err(Error::Invalid("samples have different dimensions".into()));
    }
    let s: Vec<f64> = steps.iter().map(|t| t.powi(order as i32)).collect();
    // Tableau column by column; after pass k, p[i] holds P_{i..i+k}(0).
    let mut p: Vec<Vec<f64>> = samples.iter().map(|x| x.1.clone()).collect();
    let mut prev_last = p[m - 1].clone();
    for k in 1..m {
        for i in 0..m - k {
            let (si, sj) = (s[i], s[i + k]);
            let next: Vec<f64> = (0..dim).map(|c| (-sj * p[i][c] + si * p[i + 1][c]) / (si - sj)).collect();
            p[i] = next;
        }
        if k == m - 2 {
            prev_last = p[1].clone();
        }
    }
    let value = p[0].clone();
    let error = value.iter().zip(&prev_last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Extrapolation { value, error })
}

/// Scalar convenience wrapper.
pub fn richardson_scalar(samples: &[(f64, f64)], order: u32) -> Result<(f64, f64)> {
    let v: Vec<(f64, Vec<f64>)> = samples.iter().map(|&(t, x)| (t, vec![x])).collect();
    let e = richardson_limit(&v, order)?;
    Ok((e.value[0], e.error))
}
