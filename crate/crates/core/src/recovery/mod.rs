//! Recovery of a frontal from its Legendre data (ν, a):
//! f = a ν + Σⱼ (bⱼ/ρⱼ) μ̂ⱼ with da = Σ bⱼ dθⱼ.

mod analytic;
mod extension;
mod rotation;
mod sampled;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::linalg::DEFAULT_DET_EPS;
use crate::map::DifferentiableMap;
use crate::sphere::{extract_angles, frame_unchecked, DEFAULT_POLE_EPS};

pub use analytic::AnalyticRecoverer;
pub use extension::{extend_with, Probe};
pub use rotation::random_rotation;
pub use sampled::SampledRecoverer;

/// Probe-and-extrapolate settings for singular points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Largest probe step; `None` means 1e-2 times the domain scale.
    pub h0: Option<f64>,
    /// Number of geometric steps h0, h0/2, ….
    pub levels: usize,
    /// Extra random unit directions; `None` means 2n.
    pub random_directions: Option<usize>,
    /// Extrapolation order in t.
    pub order: u32,
    /// Extrapolants whose error indicator exceeds this (relative to 1 + |value|)
    /// are rejected.
    pub max_error: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions { h0: None, levels: 4, random_directions: None, order: 1, max_error: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub det_eps: f64,
    pub pole_eps: f64,
    /// Seed for the rotation and probe-direction generators.
    pub seed: u64,
    pub max_rotations: usize,
    pub extension: ExtensionOptions,
    /// Compute tangency and height residuals in `recover_grid`.
    pub residuals: bool,
    /// Stencil width for sampled data (odd; 3 gives plain central differences).
    pub fd_points: usize,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            det_eps: DEFAULT_DET_EPS,
            pole_eps: DEFAULT_POLE_EPS,
            seed: 0,
            max_rotations: 3,
            extension: ExtensionOptions::default(),
            residuals: true,
            fd_points: 7,
        }
    }
}

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        BoxDomain { lo: vec![lo; n], hi: vec![hi; n] }
    }
    pub fn of_grid(g: &Grid) -> Self {
        BoxDomain { lo: g.axes.iter().map(|a| a[0]).collect(), hi: g.axes.iter().map(|a| a[a.len() - 1]).collect() }
    }
    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn scale(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Predicate marking points to exclude (true = excluded).
pub type Exclusion = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// (ν, a) as evaluable maps.
#[derive(Clone)]
pub struct AnalyticData {
    pub nu: DifferentiableMap,
    pub a: DifferentiableMap,
    pub domain: BoxDomain,
    pub exclude: Option<Exclusion>,
}

impl fmt::Debug for AnalyticData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticData")
            .field("nu", &self.nu)
            .field("a", &self.a)
            .field("domain", &self.domain)
            .field("exclude", &self.exclude.is_some())
            .finish()
    }
}

impl AnalyticData {
    pub fn new(nu: DifferentiableMap, a: DifferentiableMap, domain: BoxDomain) -> Result<Self> {
        let n = nu.dim_in();
        if nu.dim_out() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: nu.dim_out() });
        }
        if a.dim_in() != n || a.dim_out() != 1 {
            return Err(Error::Invalid("height map must be R^n -> R".into()));
        }
        if domain.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.dim() });
        }
        Ok(AnalyticData { nu, a, domain, exclude: None })
    }

    pub fn with_exclusion(mut self, exclude: Exclusion) -> Self {
        self.exclude = Some(exclude);
        self
    }

    pub fn n(&self) -> usize {
        self.nu.dim_in()
    }

    pub fn is_excluded(&self, x: &[f64]) -> bool {
        self.exclude.as_ref().is_some_and(|e| e(x))
    }
}

/// (ν, a) sampled on a grid; `mask[k]` is false for unusable nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledData {
    pub nu: GridField,
    pub a: GridField,
    pub mask: Vec<bool>,
}

impl SampledData {
    pub fn new(nu: GridField, a: GridField, mask: Vec<bool>) -> Result<Self> {
        let n = nu.grid.dim();
        if nu.m != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: nu.m });
        }
        if a.m != 1 || a.grid != nu.grid {
            return Err(Error::Invalid("height field must be scalar on the normal field's grid".into()));
        }
        if mask.len() != nu.grid.len() {
            return Err(Error::Invalid("mask length does not match grid".into()));
        }
        for k in 0..nu.grid.len() {
            if mask[k] {
                let v = nu.at_flat(k);
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= crate::sphere::UNIT_TOL) {
                    return Err(Error::NotUnit { norm });
                }
            }
        }
        Ok(SampledData { nu, a, mask })
    }

    pub fn grid(&self) -> &Grid {
        &self.nu.grid
    }

    /// Samples analytic data on a grid; nodes that are excluded or fail to
    /// evaluate are masked.
    pub fn from_analytic(data: &AnalyticData, grid: &Grid) -> Result<Self> {
        let n = data.n();
        if grid.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: grid.dim() });
        }
        let pts = grid.points();
        let evals: Vec<Option<(Vec<f64>, f64)>> = pts
            .par_iter()
            .map(|p| {
                let nu = data.nu.eval(p).ok()?;
                let a = data.a.eval(p).ok()?;
                Some((nu, a[0]))
            })
            .collect();
        let mut nu = Vec::with_capacity(grid.len() * (n + 1));
        let mut a = Vec::with_capacity(grid.len());
        let mut mask = Vec::with_capacity(grid.len());
        for (p, e) in pts.iter().zip(evals) {
            match e {
                Some((v, h)) => {
                    nu.extend(v);
                    a.push(h);
                    mask.push(!data.is_excluded(p));
                }
                None => {
                    nu.extend(std::iter::repeat_n(f64::NAN, n + 1));
                    a.push(f64::NAN);
                    mask.push(false);
                }
            }
        }
        SampledData::new(GridField::new(grid.clone(), n + 1, nu)?, GridField::new(grid.clone(), 1, a)?, mask)
    }
}

#[derive(Clone, Debug)]
pub enum LegendreData {
    Analytic(AnalyticData),
    Sampled(SampledData),
}

impl LegendreData {
    pub fn n(&self) -> usize {
        match self {
            LegendreData::Analytic(d) => d.n(),
            LegendreData::Sampled(d) => d.grid().dim(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeStatus {
    Regular,
    ExtendedByLimit,
    Unresolved,
    /// Excluded by the data (singular tube or sampling mask); not attempted.
    Masked,
}

impl NodeStatus {
    pub fn is_resolved(self) -> bool {
        matches!(self, NodeStatus::Regular | NodeStatus::ExtendedByLimit)
    }
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Regular => "regular",
            NodeStatus::ExtendedByLimit => "extended",
            NodeStatus::Unresolved => "unresolved",
            NodeStatus::Masked => "masked",
        }
    }
}

/// Result of a direct (non-extended) solve at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Direct {
    pub f: Vec<f64>,
    pub b: Vec<f64>,
    pub theta: Vec<f64>,
    /// Index into the recoverer's rotation list when the chart needed rotating.
    pub rotation: Option<usize>,
    pub chart_pole: bool,
}

/// Outcome at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecovery {
    pub f: Vec<f64>,
    pub b: Vec<f64>,
    pub status: NodeStatus,
    pub chart_pole: bool,
    pub rotation: Option<usize>,
    pub extrapolation_error: Option<f64>,
}

impl PointRecovery {
    fn from_direct(d: Direct) -> Self {
        PointRecovery {
            f: d.f,
            b: d.b,
            status: NodeStatus::Regular,
            chart_pole: d.chart_pole,
            rotation: d.rotation,
            extrapolation_error: None,
        }
    }

    fn unresolved(n: usize, status: NodeStatus) -> Self {
        PointRecovery {
            f: vec![f64::NAN; n + 1],
            b: vec![f64::NAN; n],
            status,
            chart_pole: false,
            rotation: None,
            extrapolation_error: None,
        }
    }
}

/// f = a ν + Σ (bⱼ/ρⱼ) μ̂ⱼ(θ).
pub fn assemble(a: f64, nu: &[f64], theta: &[f64], b: &[f64]) -> Vec<f64> {
    let fr = frame_unchecked(theta);
    let mut f: Vec<f64> = nu.iter().map(|v| a * v).collect();
    for j in 0..b.len() {
        let c = b[j] / fr.rho[j];
        for (fk, m) in f.iter_mut().zip(&fr.mu_hat[j]) {
            *fk += c * m;
        }
    }
    f
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
}

impl ResidualStats {
    pub fn from_values<I: IntoIterator<Item = f64>>(it: I) -> Self {
        let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
        for v in it {
            max = max.max(v);
            sum += v * v;
            count += 1;
        }
        let rms = if count > 0 { (sum / count as f64).sqrt() } else { 0.0 };
        ResidualStats { max, rms, count }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub regular: usize,
    pub extended: usize,
    pub unresolved: usize,
    pub masked: usize,
    pub tangency: ResidualStats,
    pub height: ResidualStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDiagnostics {
    pub status: NodeStatus,
    pub chart_pole: bool,
    pub rotation: Option<usize>,
    pub tangency_residual: Option<f64>,
    pub height_residual: Option<f64>,
    pub extrapolation_error: Option<f64>,
}

/// Reconstructed values over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredMap {
    pub grid: Grid,
    pub n: usize,
    /// (n+1) values per node, NaN where unresolved or masked.
    pub f: Vec<f64>,
    /// n coefficients per node.
    pub b: Vec<f64>,
    pub nodes: Vec<NodeDiagnostics>,
    /// Rotations referenced by `NodeDiagnostics::rotation` (row-major matrices).
    pub rotations: Vec<Vec<Vec<f64>>>,
    pub summary: Summary,
}

impl RecoveredMap {
    pub fn f_at(&self, k: usize) -> &[f64] {
        &self.f[k * (self.n + 1)..(k + 1) * (self.n + 1)]
    }

    pub fn b_at(&self, k: usize) -> &[f64] {
        &self.b[k * self.n..(k + 1) * self.n]
    }

    /// Max and RMS distance to `truth` over resolved nodes accepted by `keep`.
    pub fn error_against(
        &self,
        truth: impl Fn(&[f64]) -> Option<Vec<f64>> + Sync,
        keep: impl Fn(usize, NodeStatus) -> bool + Sync,
    ) -> ResidualStats {
        let errs: Vec<f64> = (0..self.grid.len())
            .into_par_iter()
            .filter(|&k| self.nodes[k].status.is_resolved() && keep(k, self.nodes[k].status))
            .filter_map(|k| {
                let t = truth(&self.grid.point_flat(k))?;
                Some(t.iter().zip(self.f_at(k)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            })
            .collect();
        ResidualStats::from_values(errs)
    }

    fn summarize(&mut self) {
        let mut s = Summary::default();
        for d in &self.nodes {
            match d.status {
                NodeStatus::Regular => s.regular += 1,
                NodeStatus::ExtendedByLimit => s.extended += 1,
                NodeStatus::Unresolved => s.unresolved += 1,
                NodeStatus::Masked => s.masked += 1,
            }
        }
        s.tangency = ResidualStats::from_values(self.nodes.iter().filter_map(|d| d.tangency_residual));
        s.height = ResidualStats::from_values(self.nodes.iter().filter_map(|d| d.height_residual));
        self.summary = s;
    }
}

/// Coefficients b per node with status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub grid: Grid,
    pub n: usize,
    pub b: Vec<f64>,
    pub status: Vec<NodeStatus>,
}

/// θ(x) = extract_angles(ν(x)).
pub fn angle_field(data: &AnalyticData, x: &[f64], pole_eps: f64) -> Result<Vec<f64>> {
    extract_angles(&data.nu.eval(x)?, pole_eps)
}

/// Recovery at one point (analytic data), extending by limits at singular points.
pub fn recover_point(data: &AnalyticData, x: &[f64], opts: &RecoveryOptions) -> Result<PointRecovery> {
    let r = AnalyticRecoverer::new(data, opts)?.recover(x);
    if r.status == NodeStatus::Unresolved {
        return Err(Error::Unresolved);
    }
    Ok(r)
}

/// Rᵀ · recover(R∘ν, a) at x.
pub fn recover_with_rotation(
    data: &AnalyticData,
    x: &[f64],
    r: &[Vec<f64>],
    opts: &RecoveryOptions,
) -> Result<Vec<f64>> {
    let rotated = AnalyticData {
        nu: DifferentiableMap::new(crate::map::Rotated { map: data.nu.clone(), r: r.to_vec() }),
        a: data.a.clone(),
        domain: data.domain.clone(),
        exclude: data.exclude.clone(),
    };
    let p = recover_point(&rotated, x, opts)?;
    Ok(rotation::apply_transpose(r, &p.f))
}

/// Limit of recovery along probes from x (analytic data).
pub fn extend_at_singular(data: &AnalyticData, x: &[f64], opts: &RecoveryOptions) -> Result<PointRecovery> {
    AnalyticRecoverer::new(data, opts)?.extend(x).ok_or(Error::Unresolved)
}

/// Recovery of every node of a grid.
pub fn recover_grid(data: &LegendreData, grid: &Grid, opts: &RecoveryOptions) -> Result<RecoveredMap> {
    match data {
        LegendreData::Analytic(d) => AnalyticRecoverer::new(d, opts)?.recover_grid(grid),
        LegendreData::Sampled(d) => {
            if d.grid() != grid {
                return Err(Error::Invalid("sampled data must be recovered on its own grid".into()));
            }
            SampledRecoverer::new(d, opts)?.recover_grid()
        }
    }
}

pub fn coefficient_field(data: &LegendreData, grid: &Grid, opts: &RecoveryOptions) -> Result<CoefficientField> {
    let mut o = opts.clone();
    o.residuals = false;
    let r = recover_grid(data, grid, &o)?;
    Ok(CoefficientField {
        grid: r.grid.clone(),
        n: r.n,
        b: r.b.clone(),
        status: r.nodes.iter().map(|d| d.status).collect(),
    })
}
