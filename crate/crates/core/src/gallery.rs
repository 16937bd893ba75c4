//! Worked examples: parametrizations, their Legendre data, coefficient closed
//! forms, regular sets and stage families.
//!
//! Each entry keeps its closed forms as stated alongside corrected versions
//! wherever a stated formula fails an internal-consistency check; the
//! differences are listed in [`GalleryEntry::errata`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::map::{Constant, DifferentiableMap, Formula};
use crate::recovery::{AnalyticData, BoxDomain};
use crate::sphere::nu_sphere;

/// Half-width of the tube around a singular set treated as "on the set".
pub const TUBE_RADIUS: f64 = 1e-6;

/// Base point of the constant-map example.
pub const CONSTANT_X0: [f64; 3] = [1.0, -0.5, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    Constant,
    CuspidalCrosscap,
    Crosscap,
    CuspidalEdge,
    Swallowtail,
    D4Plus,
    IntroCubicGraph,
    Cusp,
}

pub const ALL: [Example; 8] = [
    Example::Constant,
    Example::CuspidalCrosscap,
    Example::Crosscap,
    Example::CuspidalEdge,
    Example::Swallowtail,
    Example::D4Plus,
    Example::IntroCubicGraph,
    Example::Cusp,
];

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Constant => "constant",
            Example::CuspidalCrosscap => "cuspidal_crosscap",
            Example::Crosscap => "crosscap",
            Example::CuspidalEdge => "cuspidal_edge",
            Example::Swallowtail => "swallowtail",
            Example::D4Plus => "d4plus",
            Example::IntroCubicGraph => "intro_cubic_graph",
            Example::Cusp => "cusp",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        ALL.iter().copied().find(|e| e.name() == name).ok_or_else(|| Error::UnknownExample(name.to_string()))
    }

    pub fn n(self) -> usize {
        match self {
            Example::IntroCubicGraph | Example::Cusp => 1,
            Example::D4Plus => 3,
            _ => 2,
        }
    }

    pub fn has_family(self) -> bool {
        matches!(self, Example::Constant | Example::CuspidalEdge | Example::Swallowtail | Example::D4Plus)
    }

    pub fn has_stated_b(self) -> bool {
        !matches!(self, Example::Cusp)
    }
}

/// A stated formula that fails a consistency check, with its correction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erratum {
    pub item: &'static str,
    pub stated: &'static str,
    pub corrected: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    /// Unperturbed map f.
    Target,
    /// Stage map f_k (same as the target when there is no family).
    Stage,
    /// Gauss map consistent with the stage map.
    Nu,
    /// Gauss map as stated.
    NuStated,
    A,
    BStated,
    /// Coefficients for the stated angle chart, with errata applied.
    BCorrected,
    /// Coefficients for the principal-branch chart.
    BPrincipal,
    /// Angle chart θ(x) built from the stated sine/cosine formulas (errata applied).
    Chart,
}

struct GalleryFormula {
    ex: Example,
    part: Part,
    k: f64,
}

fn sgn<T: Real>(v: T) -> f64 {
    if v.re() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

fn scale<T: Real>(v: [T; 3], s: T) -> Vec<T> {
    v.iter().map(|c| *c * s).collect()
}

impl GalleryFormula {
    fn dim_out(&self) -> usize {
        let n = self.ex.n();
        match self.part {
            Part::Target | Part::Stage | Part::Nu | Part::NuStated => n + 1,
            Part::A => 1,
            Part::BStated | Part::BCorrected | Part::BPrincipal | Part::Chart => n,
        }
    }

    fn eval<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        match self.ex {
            Example::Constant => self.constant(x),
            Example::CuspidalCrosscap => self.cuspidal_crosscap(x),
            Example::Crosscap => self.crosscap(x),
            Example::CuspidalEdge => self.cuspidal_edge(x),
            Example::Swallowtail => self.swallowtail(x),
            Example::D4Plus => self.d4plus(x),
            Example::IntroCubicGraph => self.intro(x),
            Example::Cusp => self.cusp(x),
        }
    }

    fn constant<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let k = self.k;
        let x0: Vec<T> = CONSTANT_X0.iter().map(|c| T::cst(*c)).collect();
        let nu = nu_sphere(x);
        // θⱼ = xⱼ, so μ̃ⱼ = ∂ν/∂xⱼ
        let dnu = |j: usize| -> Vec<T> {
            let (s0, c0, s1, c1) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
            if j == 0 {
                vec![-s0 * c1, -s0 * s1, c0]
            } else {
                vec![-c0 * s1, c0 * c1, T::zero()]
            }
        };
        Ok(match self.part {
            Part::Target => x0,
            Part::Stage => x0.iter().zip(&nu).map(|(a, v)| *a + *v / k).collect(),
            Part::Nu | Part::NuStated => nu,
            Part::A => vec![dot(&x0, &nu) + 1.0 / k],
            Part::BStated | Part::BCorrected => vec![dot(&x0, &dnu(0)), dot(&x0, &dnu(1))],
            Part::BPrincipal => vec![dot(&x0, &dnu(0)) * sgn(x[0].cos()), dot(&x0, &dnu(1))],
            Part::Chart => x.to_vec(),
        })
    }

    fn cuspidal_crosscap<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let (x, y) = (p[0], p[1]);
        let q2 = x * x * y * y * 9.0 + y.powi(6) * 4.0;
        let r = (q2 + 4.0).sqrt();
        Ok(match self.part {
            Part::Target | Part::Stage => vec![x, y * y, x * y.powi(3)],
            Part::Nu | Part::NuStated => scale([y.powi(3) * -2.0, x * y * -3.0, T::cst(2.0)], r.recip()),
            Part::A => vec![-(x * y.powi(3) * 3.0) / r],
            Part::BStated | Part::BCorrected | Part::BPrincipal => {
                // the stated b₁ carries y²; the solution of the system has y|y|
                let yy = if self.part == Part::BStated { y * y } else { y * y.abs() };
                let b1 = x * yy * (q2 + 10.0) / ((x * x * 9.0 + y.powi(4) * 4.0).sqrt() * r);
                let b2 = (x * x * y * 3.0 - y.powi(5) * 2.0) / r;
                vec![b1, b2]
            }
            Part::Chart => {
                let q = q2.sqrt();
                let t1 = (r.recip() * 2.0).atan2(q / r);
                let t2 = (-(x * y * 3.0) / q).atan2(-(y.powi(3) * 2.0) / q);
                vec![t1, t2]
            }
        })
    }

    fn crosscap<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let (x, y) = (p[0], p[1]);
        let q2 = x * x + y.powi(4) * 4.0;
        let s = (q2 + y * y * 4.0).sqrt();
        Ok(match self.part {
            Part::Target | Part::Stage => vec![x, y * y, x * y],
            Part::Nu | Part::NuStated => scale([y * y * -2.0, -x, y * 2.0], s.recip()),
            Part::A => vec![-(x * y * y) / s],
            Part::BStated | Part::BCorrected | Part::BPrincipal => {
                let b1 = x * y * (q2 + y * y * 6.0) / (q2.sqrt() * s);
                // stated denominator √(x²+4y⁴) belongs to f·μ̂₂, not to b₂
                let den = if self.part == Part::BStated { q2.sqrt() } else { s };
                vec![b1, (x * x - y.powi(4) * 2.0) / den]
            }
            Part::Chart => {
                let q = q2.sqrt();
                let t1 = (y * 2.0 / s).atan2(q / s);
                // stated sin θ₂ = x/√(x²+4y⁴) has the wrong sign for this ν
                let t2 = (-x / q).atan2(-(y * y * 2.0) / q);
                vec![t1, t2]
            }
        })
    }

    fn cuspidal_edge<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let (x, y, n) = (p[0], p[1], self.k);
        let e = (y * y * (9.0 * n * n) + 4.0 * n * n + x * x * y * y * 36.0).sqrt();
        let m = (x * x * 4.0 + n * n).sqrt();
        Ok(match self.part {
            Part::Target => vec![x, y * y, y.powi(3)],
            Part::Stage => vec![x, x * x / n + y * y, y.powi(3)],
            Part::Nu | Part::NuStated => scale([x * y * 6.0, y * (-3.0 * n), T::cst(2.0 * n)], e.recip()),
            Part::A => vec![y * (x * x * 3.0 - y * y * n) / e],
            Part::BStated | Part::BCorrected | Part::BPrincipal => {
                let b1 = (y.powi(4) * (3.0 * n * n) + y * y * (2.0 * n * n) - x * x * (2.0 * n)
                    + x * x * y.powi(4) * 12.0)
                    / (m * e);
                let b2 = x * y * 3.0 * (y * y * (2.0 * n) + x * x * 2.0 + n * n) / (e * n);
                // the stated chart has cos θ₁ of the sign of y
                let s = if self.part == Part::BPrincipal { sgn(y) } else { 1.0 };
                vec![b1 * s, b2]
            }
            Part::Chart => {
                let t1 = (e.recip() * (2.0 * n)).atan2(y * 3.0 * m / e);
                let t2 = (-(m.recip() * n)).atan2(x * 2.0 / m);
                vec![t1, t2]
            }
        })
    }

    fn swallowtail<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let (x, y, n) = (p[0], p[1], self.k);
        let v = y.powi(4) * (n * n) + y * y * (4.0 * n * n) - x * y * y * (4.0 * n) + x * x * 4.0;
        let w = (v + n * n).sqrt();
        Ok(match self.part {
            Part::Target => vec![x, y.powi(3) * 2.0 + x * y, y.powi(4) * 3.0 + x * y * y],
            Part::Stage => vec![x, x * y + y.powi(3) * 2.0, x * x / n + x * y * y + y.powi(4) * 3.0],
            Part::Nu => scale([y * y * n - x * 2.0, y * (-2.0 * n), T::cst(n)], w.recip()),
            // stated middle component 2ny is not normal to f_n
            Part::NuStated => scale([y * y * n - x * 2.0, y * (2.0 * n), T::cst(n)], w.recip()),
            Part::A => vec![-(y.powi(4) * n + x * x) / w],
            Part::BStated | Part::BCorrected | Part::BPrincipal => {
                let y2 = y * y;
                let t1 =
                    y2 * (x * y.powi(4) + x * y2 * 4.0 + x + y.powi(6) * 3.0 + y.powi(4) * 12.0 + y2 * 4.0) * n.powi(3);
                let t2 = x * (x * (-(y.powi(4) * 3.0) + y2 * 4.0 + 2.0) - y.powi(6) * 12.0) * (n * n);
                let t3 = x * x * y.powi(4) * (12.0 * n) + x.powi(4) * 4.0;
                let d1 = (y2 * (y2 + 4.0) * (n * n) - x * y2 * (4.0 * n) + x * x * 4.0).sqrt();
                let d2 = ((y.powi(4) + y2 * 4.0 + 1.0) * (n * n) - x * y2 * (4.0 * n) + x * x * 4.0).sqrt();
                let b1 = (t1 + t2 + t3) / (d1 * d2 * n);
                let b2 = y * (x * y2 * n + x * (2.0 * n) + y.powi(4) * (2.0 * n) - x * x * 2.0 - x * y2 * 4.0) / w;
                vec![b1, b2]
            }
            Part::Chart => {
                let sv = v.sqrt();
                let t1 = (w.recip() * n).atan2(sv / w);
                let t2 = (y * (-2.0 * n) / sv).atan2((y * y * n - x * 2.0) / sv);
                vec![t1, t2]
            }
        })
    }

    fn d4plus<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let (u, v, w, n) = (p[0], p[1], p[2], self.k);
        let nn = n * n;
        let a2 = v.powi(4) * nn + w * w * (4.0 * nn) - u * v * v * (4.0 * n) + u * u * 4.0;
        let a1 = a2 + v * v * nn;
        let d = (a1 + nn).sqrt();
        Ok(match self.part {
            Part::Target => {
                vec![u, v * w, u * v * 2.0 + v * v * 3.0 + w * w, u * v * v + v.powi(3) * 2.0 + v * w * w * 2.0]
            }
            Part::Stage => vec![
                u,
                v * w,
                u * v * 2.0 + v * v * 3.0 + w * w,
                u * u / n + u * v * v + v.powi(3) * 2.0 + v * w * w * 2.0,
            ],
            Part::Nu | Part::NuStated => {
                [v * v * n - u * 2.0, w * (-2.0 * n), v * (-n), T::cst(n)].iter().map(|c| *c / d).collect()
            }
            // not stated; f_n·ν_n
            Part::A => vec![-(u * u + v.powi(3) * n + v * w * w * n) / d],
            Part::BStated | Part::BCorrected | Part::BPrincipal => {
                let (v2, w2) = (v * v, w * w);
                let s1 = (a1).sqrt();
                let s2 = (a2).sqrt();
                let num1 = v
                    * (u * (v.powi(5) + v.powi(3) + v * w2 * 4.0 + v)
                        + v.powi(6) * 2.0
                        + v.powi(4) * (w2 + 1.0) * 2.0
                        + v2 * (w2 * 10.0 + 3.0)
                        + w2 * (w2 * 8.0 + 3.0))
                    * n.powi(3)
                    + u * (u * (-(v.powi(4) * 3.0) + v2 + w2 * 4.0 + 2.0) - v.powi(3) * (v2 + w2) * 8.0) * nn
                    + u * u * v * (v2 + w2) * (8.0 * n)
                    + u.powi(4) * 4.0;
                let b1 = num1 / (s1 * d * n);
                let num2 = (u * (v.powi(5) * 2.0 + v.powi(3) + v * w2 * 8.0)
                    + v.powi(6) * 3.0
                    + v.powi(4) * w2
                    + v2 * w2 * 10.0
                    + w2 * w2 * 4.0)
                    * nn
                    - u * v * (u * v2 * 4.0 + u + v.powi(3) * 6.0 + v * w2 * 2.0) * (2.0 * n)
                    + u * u * (u * v * 2.0 + v2 * 3.0 + w2) * 4.0;
                let b2 = num2 / (s2 * d);
                let b3 = w * ((u * 2.0 + v.powi(3)) * n - u * v * 2.0) / d;
                vec![b1, b2, b3]
            }
            Part::Chart => {
                let (s1, s2) = (a1.sqrt(), a2.sqrt());
                let t1 = (d.recip() * n).atan2(s1 / d);
                let t2 = (v * (-n) / s1).atan2(s2 / s1);
                let t3 = (w * (-2.0 * n) / s2).atan2((v * v * n - u * 2.0) / s2);
                vec![t1, t2, t3]
            }
        })
    }

    fn intro<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let x = p[0];
        let r = (x.powi(4) * 9.0 + 1.0).sqrt();
        Ok(match self.part {
            Part::Target | Part::Stage => vec![x, x.powi(3)],
            Part::Nu | Part::NuStated => vec![x * x * -3.0 / r, r.recip()],
            Part::A => vec![x.powi(3) * -2.0 / r],
            Part::BStated | Part::BCorrected | Part::BPrincipal => vec![-(x + x.powi(5) * 3.0) / r],
            Part::Chart => vec![r.recip().atan2(x * x * -3.0 / r)],
        })
    }

    fn cusp<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        let x = p[0];
        let r = (x * x * 9.0 + 4.0).sqrt();
        Ok(match self.part {
            Part::Target | Part::Stage => vec![x * x, x.powi(3)],
            Part::Nu | Part::NuStated => vec![x * -3.0 / r, T::cst(2.0) / r],
            Part::A => vec![-x.powi(3) / r],
            Part::Chart => vec![(T::cst(2.0) / r).atan2(x * -3.0 / r)],
            _ => return Err(Error::NoPrintedCoefficients(self.ex.name().into())),
        })
    }
}

impl Formula for GalleryFormula {
    fn dim_in(&self) -> usize {
        self.ex.n()
    }
    fn dim_out(&self) -> usize {
        GalleryFormula::dim_out(self)
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        self.eval(x)
    }
    fn label(&self) -> String {
        format!("{}:{:?}", self.ex.name(), self.part)
    }
}

/// One worked example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub example: Example,
    pub name: &'static str,
    pub n: usize,
    pub has_family: bool,
    pub domain: BoxDomain,
    pub errata: Vec<Erratum>,
}

pub fn lookup(name: &str) -> Result<GalleryEntry> {
    Ok(entry(Example::from_name(name)?))
}

pub fn entry(ex: Example) -> GalleryEntry {
    let n = ex.n();
    GalleryEntry {
        example: ex,
        name: ex.name(),
        n,
        has_family: ex.has_family(),
        domain: BoxDomain::cube(n, -2.0, 2.0),
        errata: errata(ex),
    }
}

pub fn names() -> Vec<&'static str> {
    ALL.iter().map(|e| e.name()).collect()
}

fn errata(ex: Example) -> Vec<Erratum> {
    let e = |item, stated, corrected| Erratum { item, stated, corrected };
    match ex {
        Example::Constant => vec![
            e("Reg(f_k)", "R^n", "{x : cos x_1 ... cos x_{n-1} != 0}"),
            e("b_j", "x0 . mu_j", "X0 . d nu/d x_j (X0 is the base point; the final expansion needs unit mu_j)"),
        ],
        Example::CuspidalCrosscap => vec![e(
            "b_1",
            "x y^2 (9x^2y^2+4y^6+10) / (sqrt(9x^2+4y^4) sqrt(9x^2y^2+4y^6+4))",
            "x y|y| (9x^2y^2+4y^6+10) / (sqrt(9x^2+4y^4) sqrt(9x^2y^2+4y^6+4))",
        )],
        Example::Crosscap => vec![
            e("sin theta_2", "x/sqrt(x^2+4y^4)", "-x/sqrt(x^2+4y^4)"),
            e("b_2", "(x^2-2y^4)/sqrt(x^2+4y^4)", "(x^2-2y^4)/sqrt(x^2+4y^4+4y^2)"),
            e("Reg(nu)", "R^2 minus the origin", "{y != 0}"),
        ],
        Example::CuspidalEdge => vec![e(
            "angle chart",
            "cos theta_1 = 3y sqrt(n^2+4x^2)/sqrt(9n^2y^2+4n^2+36x^2y^2)",
            "signed cos theta_1 leaves the principal branch for y < 0; there b_1 changes sign",
        )],
        Example::Swallowtail => {
            vec![e("nu_n", "(ny^2-2x, 2ny, n)/N", "(ny^2-2x, -2ny, n)/N"), e("Reg(nu_n)", "{x != -6y^2}", "R^2")]
        }
        Example::D4Plus => {
            vec![e("a_n", "not stated", "-(u^2 + n v^3 + n v w^2)/N"), e("Reg(nu_n)", "{w^2 != uv+3v^2}", "R^3")]
        }
        Example::IntroCubicGraph | Example::Cusp => vec![],
    }
}

fn hypot_dist(g: f64, grad: &[f64]) -> f64 {
    let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    if gn == 0.0 {
        if g == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        g.abs() / gn
    }
}

impl GalleryEntry {
    fn formula(&self, part: Part, stage: Option<u32>) -> Result<DifferentiableMap> {
        let k = self.stage_value(stage)?;
        Ok(DifferentiableMap::new(GalleryFormula { ex: self.example, part, k }))
    }

    fn stage_value(&self, stage: Option<u32>) -> Result<f64> {
        match (self.has_family, stage) {
            (true, Some(0)) => Err(Error::Invalid("stages start at 1".into())),
            (true, Some(k)) => Ok(k as f64),
            (true, None) => Err(Error::StageRequired(self.name.into())),
            (false, Some(_)) => Err(Error::StageNotApplicable(self.name.into())),
            (false, None) => Ok(1.0),
        }
    }

    /// The unperturbed map f.
    pub fn f(&self) -> DifferentiableMap {
        if self.example == Example::Constant {
            return DifferentiableMap::new(Constant { n: self.n, value: CONSTANT_X0.to_vec() });
        }
        DifferentiableMap::new(GalleryFormula { ex: self.example, part: Part::Target, k: 1.0 })
    }

    /// Stage map f_k of the family.
    pub fn family(&self, stage: u32) -> Result<DifferentiableMap> {
        if !self.has_family {
            return Err(Error::StageNotApplicable(self.name.into()));
        }
        self.formula(Part::Stage, Some(stage))
    }

    /// The map whose Legendre data is encoded: f_k for families, f otherwise.
    pub fn stage_map(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.formula(Part::Stage, stage)
    }

    /// Gauss map consistent with the stage map (errata applied).
    pub fn nu_closed(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.formula(Part::Nu, stage)
    }

    /// Gauss map exactly as stated.
    pub fn nu_stated(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.formula(Part::NuStated, stage)
    }

    pub fn a_closed(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.formula(Part::A, stage)
    }

    pub fn b_stated(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.require_b()?;
        self.formula(Part::BStated, stage)
    }

    /// Coefficients for the stated chart, errata applied.
    pub fn b_corrected(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.require_b()?;
        self.formula(Part::BCorrected, stage)
    }

    /// Coefficients for the principal-branch chart used by recovery.
    pub fn b_principal(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.require_b()?;
        self.formula(Part::BPrincipal, stage)
    }

    /// Angle chart assembled from the stated sine and cosine formulas.
    pub fn chart(&self, stage: Option<u32>) -> Result<DifferentiableMap> {
        self.formula(Part::Chart, stage)
    }

    fn require_b(&self) -> Result<()> {
        if self.example.has_stated_b() {
            Ok(())
        } else {
            Err(Error::NoPrintedCoefficients(self.name.into()))
        }
    }

    /// Distance-like measure to the stated singular set of f (or f_k);
    /// `None` when the stated regular set is everything.
    pub fn stated_singular_distance(&self, x: &[f64]) -> Option<f64> {
        match self.example {
            Example::Constant | Example::IntroCubicGraph | Example::Cusp => None,
            Example::CuspidalCrosscap | Example::CuspidalEdge => Some(x[1].abs()),
            Example::Crosscap => Some((x[0] * x[0] + x[1] * x[1]).sqrt()),
            Example::Swallowtail => Some(hypot_dist(x[0] + 6.0 * x[1] * x[1], &[1.0, 12.0 * x[1]])),
            Example::D4Plus => {
                let (u, v, w) = (x[0], x[1], x[2]);
                Some(hypot_dist(w * w - u * v - 3.0 * v * v, &[-v, -u - 6.0 * v, 2.0 * w]))
            }
        }
    }

    /// Stated regular-set predicate for f (or f_k): false within the tube.
    pub fn regular_set_predicate(&self, x: &[f64]) -> bool {
        self.stated_singular_distance(x).is_none_or(|d| d > TUBE_RADIUS)
    }

    /// Distance-like measure to the actual singular set of ν (None if empty).
    pub fn nu_singular_distance(&self, x: &[f64]) -> Option<f64> {
        match self.example {
            Example::Constant => Some(x[0].cos().abs()),
            Example::CuspidalCrosscap | Example::CuspidalEdge | Example::Crosscap => Some(x[1].abs()),
            Example::IntroCubicGraph => Some(x[0].abs()),
            Example::Swallowtail | Example::D4Plus | Example::Cusp => None,
        }
    }

    /// Legendre data of the stage map over the default domain, with the
    /// stated singular set of f excluded.
    pub fn legendre_data(&self, stage: Option<u32>) -> Result<AnalyticData> {
        let data = AnalyticData::new(self.nu_closed(stage)?, self.a_closed(stage)?, self.domain.clone())?;
        if self.stated_singular_distance(&vec![0.5; self.n]).is_none() {
            return Ok(data);
        }
        let me = self.clone();
        Ok(data.with_exclusion(Arc::new(move |x: &[f64]| !me.regular_set_predicate(x))))
    }
}

pub fn legendre_data_of(entry: &GalleryEntry, stage: Option<u32>) -> Result<AnalyticData> {
    entry.legendre_data(stage)
}

/// Evaluates the stated coefficient formulas.
pub fn oracle_b(entry: &GalleryEntry, stage: Option<u32>, x: &[f64]) -> Result<Vec<f64>> {
    entry.b_stated(stage)?.eval(x)
}

/// Data that is the Legendre data of no frontal: ν ≡ (0, 1), a(x) = x.
pub fn no_envelope_data() -> AnalyticData {
    struct Height;
    impl Formula for Height {
        fn dim_in(&self) -> usize {
            1
        }
        fn dim_out(&self) -> usize {
            1
        }
        fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
            Ok(vec![x[0]])
        }
    }
    AnalyticData::new(
        DifferentiableMap::new(Constant { n: 1, value: vec![0.0, 1.0] }),
        DifferentiableMap::new(Height),
        BoxDomain::cube(1, -2.0, 2.0),
    )
    .expect("consistent dimensions")
}
