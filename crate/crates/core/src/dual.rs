//! Truncated first-order Taylor arithmetic.
//!
//! `Dual<T>` carries a value and up to [`MAX_VARS`] partial derivatives.
//! Nesting (`Dual<Dual<f64>>`) yields second derivatives, which is how the
//! Gauss map of a parametrization is itself differentiated.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::Result;
use crate::map::DifferentiableMap;

/// Largest number of independent variables a dual number can track.
pub const MAX_VARS: usize = 4;

/// Scalar type usable inside a [`crate::map::Formula`].
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(c: f64) -> Self;
    /// Real part (value with every derivative dropped).
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn asin(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn abs(self) -> Self;
    fn is_finite(&self) -> bool;

    /// Evaluates an erased map at this scalar level.
    fn eval_map(map: &DifferentiableMap, x: &[Self]) -> Result<Vec<Self>>;
    /// Evaluates an erased map one derivative level above this one.
    fn eval_map_lifted(map: &DifferentiableMap, x: &[Dual<Self>]) -> Result<Vec<Dual<Self>>>;
    /// Evaluates an erased map two derivative levels above this one.
    fn eval_map_lifted2(map: &DifferentiableMap, x: &[Dual<Dual<Self>>]) -> Result<Vec<Dual<Dual<Self>>>>;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn sq(self) -> Self {
        self * self
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Real for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn asin(self) -> Self {
        f64::asin(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn eval_map(map: &DifferentiableMap, x: &[f64]) -> Result<Vec<f64>> {
        map.eval(x)
    }
    fn eval_map_lifted(map: &DifferentiableMap, x: &[Dual<f64>]) -> Result<Vec<Dual<f64>>> {
        map.eval_dual(x)
    }
    fn eval_map_lifted2(map: &DifferentiableMap, x: &[Dual2]) -> Result<Vec<Dual2>> {
        map.eval_dual2(x)
    }
}

/// First-order dual number over `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T: Real = f64> {
    pub v: T,
    pub d: [T; MAX_VARS],
    /// Number of active derivative slots.
    pub len: u8,
}

/// Second-order nesting.
pub type Dual2 = Dual<Dual<f64>>;

impl<T: Real> Dual<T> {
    pub fn constant(v: T) -> Self {
        Dual { v, d: [T::zero(); MAX_VARS], len: 0 }
    }

    /// Independent variable `i` among `len` with value `v`.
    pub fn var(v: T, i: usize, len: usize) -> Self {
        assert!(len <= MAX_VARS && i < len, "dual variable index out of range");
        let mut d = [T::zero(); MAX_VARS];
        d[i] = T::one();
        Dual { v, d, len: len as u8 }
    }

    /// Seeds a full point: component `i` becomes variable `i`.
    pub fn seed(x: &[T]) -> Vec<Self> {
        x.iter().enumerate().map(|(i, &xi)| Self::var(xi, i, x.len())).collect()
    }

    pub fn deriv(&self, i: usize) -> T {
        if i < self.len as usize {
            self.d[i]
        } else {
            T::zero()
        }
    }

    fn chain(self, fv: T, dfv: T) -> Self {
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..self.len as usize {
            d[i] = self.d[i] * dfv;
        }
        Dual { v: fv, d, len: self.len }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let len = self.len.max(o.len);
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..len as usize {
            d[i] = self.d[i] + o.d[i];
        }
        Dual { v: self.v + o.v, d, len }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let len = self.len.max(o.len);
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..len as usize {
            d[i] = self.d[i] - o.d[i];
        }
        Dual { v: self.v - o.v, d, len }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let len = self.len.max(o.len);
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..len as usize {
            d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        Dual { v: self.v * o.v, d, len }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let len = self.len.max(o.len);
        let inv = o.v.recip();
        let q = self.v * inv;
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..len as usize {
            d[i] = (self.d[i] - q * o.d[i]) * inv;
        }
        Dual { v: q, d, len }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut d = self.d;
        for x in d.iter_mut().take(self.len as usize) {
            *x = -*x;
        }
        Dual { v: -self.v, d, len: self.len }
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v = self.v + c;
        self
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v = self.v - c;
        self
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v = self.v * c;
        for x in self.d.iter_mut().take(self.len as usize) {
            *x = *x * c;
        }
        self
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(c: f64) -> Self {
        Dual::constant(T::cst(c))
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn asin(self) -> Self {
        let dv = (T::one() - self.v * self.v).sqrt().recip();
        self.chain(self.v.asin(), dv)
    }
    fn atan2(self, x: Self) -> Self {
        let len = self.len.max(x.len);
        let r2 = (self.v * self.v + x.v * x.v).recip();
        let mut d = [T::zero(); MAX_VARS];
        for i in 0..len as usize {
            d[i] = (x.v * self.d[i] - self.v * x.d[i]) * r2;
        }
        Dual { v: self.v.atan2(x.v), d, len }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.v.powi(k), self.v.powi(k - 1) * k as f64),
        }
    }
    fn abs(self) -> Self {
        if self.v.re() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d[..self.len as usize].iter().all(|x| x.is_finite())
    }
    fn eval_map(map: &DifferentiableMap, x: &[Self]) -> Result<Vec<Self>> {
        T::eval_map_lifted(map, x)
    }
    fn eval_map_lifted(map: &DifferentiableMap, x: &[Dual<Self>]) -> Result<Vec<Dual<Self>>> {
        T::eval_map_lifted2(map, x)
    }
    fn eval_map_lifted2(_map: &DifferentiableMap, _x: &[Dual<Dual<Self>>]) -> Result<Vec<Dual<Dual<Self>>>> {
        Err(crate::error::Error::Domain("derivative nesting deeper than two levels is not supported".into()))
    }
}
