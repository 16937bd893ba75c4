//! Spherical coordinates on Sⁿ, the companion orthonormal frame and the
//! inverse angle extraction on the principal branch (cos θᵢ > 0 for i < n).

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};

pub const DEFAULT_POLE_EPS: f64 = 1e-8;
pub const UNIT_TOL: f64 = 1e-8;

/// ν^n(θ) = (∏ cos θᵢ, sin θₙ ∏_{i<n} cos θᵢ, …, sin θ₂ cos θ₁, sin θ₁).
pub fn nu_sphere<T: Real>(theta: &[T]) -> Vec<T> {
    let n = theta.len();
    let cos: Vec<T> = theta.iter().map(|t| t.cos()).collect();
    // prefix[k] = ∏_{i<k} cos θ_i (0-based)
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(T::one());
    for c in &cos {
        let last = *prefix.last().unwrap();
        prefix.push(last * *c);
    }
    let mut v = Vec::with_capacity(n + 1);
    v.push(prefix[n]);
    for k in 1..=n {
        // angle index (0-based) carrying the sine in component k
        let m = n - k;
        v.push(theta[m].sin() * prefix[m]);
    }
    v
}

/// Orthonormal frame attached to an angle vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub nu: Vec<f64>,
    /// μ̃ᵢ = ∂ν^n/∂θᵢ
    pub mu_tilde: Vec<Vec<f64>>,
    pub mu_hat: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
}

/// μ̂_j in closed form; the factor ρ_j is divided out symbolically so this is
/// valid even where the chart degenerates.
fn mu_hat_closed(theta: &[f64], j: usize) -> Vec<f64> {
    let n = theta.len();
    let (s, c): (Vec<f64>, Vec<f64>) = theta.iter().map(|t| (t.sin(), t.cos())).unzip();
    let mut out = vec![0.0; n + 1];
    out[0] = -s[j] * c[j + 1..].iter().product::<f64>();
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let m = n - k;
        *slot = if m == j {
            c[j]
        } else if j < m {
            -s[m] * s[j] * c[j + 1..m].iter().product::<f64>()
        } else {
            0.0
        };
    }
    out
}

/// Frame without the pole check.
pub fn frame_unchecked(theta: &[f64]) -> Frame {
    let n = theta.len();
    let nu = nu_sphere(theta);
    let mut rho = Vec::with_capacity(n);
    let mut p = 1.0;
    for t in theta {
        rho.push(p);
        p *= t.cos();
    }
    let mu_hat: Vec<Vec<f64>> = (0..n).map(|j| mu_hat_closed(theta, j)).collect();
    let mu_tilde = mu_hat.iter().zip(&rho).map(|(m, r)| m.iter().map(|x| x * r).collect()).collect();
    Frame { nu, mu_tilde, mu_hat, rho }
}

/// {ν, μ̂₁…μ̂ₙ} with ρᵢ = ∏_{j<i} cos θⱼ; `ChartPole` if some ρᵢ < pole_eps.
pub fn frame(theta: &[f64], pole_eps: f64) -> Result<Frame> {
    let f = frame_unchecked(theta);
    if let Some((index, &product)) = f.rho.iter().enumerate().find(|(_, r)| r.abs() < pole_eps) {
        return Err(Error::ChartPole { index, product });
    }
    Ok(f)
}

/// Inverse of [`nu_sphere`] on the principal branch. Works at any scalar
/// level, so dual inputs give exact angle derivatives.
pub fn extract_angles<T: Real>(v: &[T], pole_eps: f64) -> Result<Vec<T>> {
    if v.len() < 2 {
        return Err(Error::DimensionUnsupported(v.len()));
    }
    let n = v.len() - 1;
    let norm = v.iter().map(|c| c.re() * c.re()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    // p after k angles equals |(v₀, …, v_{n-k})|; computed as that norm rather
    // than a running product of cosines, which cancels near the poles
    let mut sq = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    for c in v {
        acc += *c * *c;
        sq.push(acc);
    }
    let mut theta = Vec::with_capacity(n);
    let mut p = T::one();
    for k in 0..n.saturating_sub(1) {
        if p.re() < pole_eps {
            return Err(Error::ChartPole { index: k, product: p.re() });
        }
        let rest = sq[n - k - 1].sqrt();
        // asin(v[n-k]/p) written as an angle of the pair (v[n-k], rest)
        theta.push(v[n - k].atan2(rest));
        p = rest;
    }
    if p.re() < pole_eps {
        return Err(Error::ChartPole { index: n - 1, product: p.re() });
    }
    theta.push(v[1].atan2(v[0]));
    Ok(theta)
}
