//! Evaluable maps that can be run on plain reals and on dual numbers.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dual::{Dual, Dual2, Real, MAX_VARS};
use crate::error::{Error, Result};

/// A map ℝⁿ → ℝᵐ written once, generically over the scalar type.
pub trait Formula: Send + Sync + 'static {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>>;
    fn label(&self) -> String {
        "formula".into()
    }
}

trait Erased: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn label(&self) -> String;
    fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn eval_d1(&self, x: &[Dual]) -> Result<Vec<Dual>>;
    fn eval_d2(&self, x: &[Dual2]) -> Result<Vec<Dual2>>;
}

impl<F: Formula> Erased for F {
    fn dim_in(&self) -> usize {
        Formula::dim_in(self)
    }
    fn dim_out(&self) -> usize {
        Formula::dim_out(self)
    }
    fn label(&self) -> String {
        Formula::label(self)
    }
    fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(x)
    }
    fn eval_d1(&self, x: &[Dual]) -> Result<Vec<Dual>> {
        self.apply(x)
    }
    fn eval_d2(&self, x: &[Dual2]) -> Result<Vec<Dual2>> {
        self.apply(x)
    }
}

/// Type-erased, cheaply clonable, thread-safe [`Formula`].
#[derive(Clone)]
pub struct DifferentiableMap {
    inner: Arc<dyn Erased>,
}

impl fmt::Debug for DifferentiableMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentiableMap({}: R^{} -> R^{})", self.label(), self.dim_in(), self.dim_out())
    }
}

fn check<T: Real>(label: &str, dim_out: usize, v: Result<Vec<T>>) -> Result<Vec<T>> {
    let v = v?;
    if v.len() != dim_out {
        return Err(Error::DimensionMismatch { expected: dim_out, got: v.len() });
    }
    if v.iter().all(|c| c.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{label}: non-finite value")))
    }
}

impl DifferentiableMap {
    pub fn new<F: Formula>(f: F) -> Self {
        DifferentiableMap { inner: Arc::new(f) }
    }

    pub fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.inner.dim_out()
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    fn check_in(&self, len: usize) -> Result<()> {
        if len != self.dim_in() {
            return Err(Error::DimensionMismatch { expected: self.dim_in(), got: len });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_in(x.len())?;
        check(&self.label(), self.dim_out(), self.inner.eval_f64(x))
    }

    pub fn eval_dual(&self, x: &[Dual]) -> Result<Vec<Dual>> {
        self.check_in(x.len())?;
        check(&self.label(), self.dim_out(), self.inner.eval_d1(x))
    }

    pub fn eval_dual2(&self, x: &[Dual2]) -> Result<Vec<Dual2>> {
        self.check_in(x.len())?;
        check(&self.label(), self.dim_out(), self.inner.eval_d2(x))
    }

    /// Evaluates at any supported scalar level.
    pub fn eval_at<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        T::eval_map(self, x)
    }
}

/// Value and Jacobian (`jac[j][i] = ∂ component j / ∂ x_i`) at any scalar level.
pub fn value_and_jacobian<T: Real>(map: &DifferentiableMap, x: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = x.len();
    if n > MAX_VARS {
        return Err(Error::DimensionUnsupported(n));
    }
    let seeded = Dual::seed(x);
    let out = T::eval_map_lifted(map, &seeded)?;
    let vals = out.iter().map(|o| o.v).collect();
    let jac = out.iter().map(|o| (0..n).map(|i| o.deriv(i)).collect()).collect();
    Ok((vals, jac))
}

/// Exact Jacobian (m×n) by forward-mode differentiation.
pub fn jacobian_exact(map: &DifferentiableMap, x: &[f64]) -> Result<DMatrix<f64>> {
    let (_, jac) = value_and_jacobian(map, x)?;
    let (m, n) = (map.dim_out(), x.len());
    Ok(DMatrix::from_fn(m, n, |j, i| jac[j][i]))
}

/// The constant map x ↦ c.
#[derive(Clone, Debug)]
pub struct Constant {
    pub n: usize,
    pub value: Vec<f64>,
}

impl Formula for Constant {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.value.len()
    }
    fn apply<T: Real>(&self, _x: &[T]) -> Result<Vec<T>> {
        Ok(self.value.iter().map(|&c| T::cst(c)).collect())
    }
    fn label(&self) -> String {
        "constant".into()
    }
}

/// Pointwise dot product of two maps with equal output dimension.
pub struct DotProduct {
    pub left: DifferentiableMap,
    pub right: DifferentiableMap,
}

impl Formula for DotProduct {
    fn dim_in(&self) -> usize {
        self.left.dim_in()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let l = self.left.eval_at(x)?;
        let r = self.right.eval_at(x)?;
        let mut s = T::zero();
        for (a, b) in l.iter().zip(&r) {
            s += *a * *b;
        }
        Ok(vec![s])
    }
    fn label(&self) -> String {
        format!("({})·({})", self.left.label(), self.right.label())
    }
}

/// x ↦ R·g(x) for a fixed matrix R (row-major, square).
pub struct Rotated {
    pub map: DifferentiableMap,
    pub r: Vec<Vec<f64>>,
}

impl Formula for Rotated {
    fn dim_in(&self) -> usize {
        self.map.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.r.len()
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let v = self.map.eval_at(x)?;
        Ok(self
            .r
            .iter()
            .map(|row| {
                let mut s = T::zero();
                for (c, vi) in row.iter().zip(&v) {
                    s += *vi * *c;
                }
                s
            })
            .collect())
    }
    fn label(&self) -> String {
        format!("R·{}", self.map.label())
    }
}

/// x ↦ g(x) + Σ_k t_k h_k(x) where h is a vector map and t a constant vector; used for
/// translating height data (a + t·ν).
pub struct Translated {
    pub base: DifferentiableMap,
    pub nu: DifferentiableMap,
    pub t: Vec<f64>,
}

impl Formula for Translated {
    fn dim_in(&self) -> usize {
        self.base.dim_in()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let a = self.base.eval_at(x)?;
        let nu = self.nu.eval_at(x)?;
        let mut s = a[0];
        for (c, v) in self.t.iter().zip(&nu) {
            s += *v * *c;
        }
        Ok(vec![s])
    }
    fn label(&self) -> String {
        format!("{} + t·ν", self.base.label())
    }
}
