use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::extension::{extend_with, Probe};
use super::rotation::{apply_transpose, random_rotation};
use super::{
    assemble, AnalyticData, Direct, Grid, NodeDiagnostics, NodeStatus, PointRecovery, RecoveredMap, RecoveryOptions,
    Summary,
};
use crate::dual::{Dual, MAX_VARS};
use crate::error::{Error, Result};
use crate::grid::fd_step;
use crate::linalg::solve_coefficients;
use crate::map::{DifferentiableMap, Rotated};
use crate::sphere::extract_angles;

/// Reusable recovery context for analytic data (exact derivatives).
pub struct AnalyticRecoverer<'a> {
    data: &'a AnalyticData,
    opts: &'a RecoveryOptions,
    rotations: Vec<(Vec<Vec<f64>>, DifferentiableMap)>,
    probes: Vec<Probe>,
}

/// Deterministic probe rays: ±eᵢ followed by seeded random unit vectors.
pub(crate) fn probe_directions(n: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + extra);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            dirs.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    while dirs.len() < 2 * n + extra {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 {
            dirs.push(v.iter().map(|c| c / norm).collect());
        }
    }
    dirs
}

impl<'a> AnalyticRecoverer<'a> {
    pub fn new(data: &'a AnalyticData, opts: &'a RecoveryOptions) -> Result<Self> {
        let n = data.n();
        if n > MAX_VARS {
            return Err(Error::DimensionUnsupported(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let rotations = (0..opts.max_rotations)
            .map(|_| {
                let r = random_rotation(n + 1, &mut rng);
                let m = DifferentiableMap::new(Rotated { map: data.nu.clone(), r: r.clone() });
                (r, m)
            })
            .collect();
        let ext = &opts.extension;
        let h0 = ext.h0.unwrap_or(1e-2 * data.domain.scale());
        let steps: Vec<f64> = (0..ext.levels).map(|k| h0 / 2f64.powi(k as i32)).collect();
        let probes = probe_directions(n, ext.random_directions.unwrap_or(2 * n), opts.seed)
            .into_iter()
            .map(|direction| Probe { direction, steps: steps.clone() })
            .collect();
        Ok(AnalyticRecoverer { data, opts, rotations, probes })
    }

    pub fn rotations(&self) -> Vec<Vec<Vec<f64>>> {
        self.rotations.iter().map(|(r, _)| r.clone()).collect()
    }

    fn solve(&self, nu: &DifferentiableMap, x: &[f64]) -> Result<Direct> {
        let xd = Dual::seed(x);
        let nud = nu.eval_dual(&xd)?;
        let th = extract_angles(&nud, self.opts.pole_eps)?;
        let ad = self.data.a.eval_dual(&xd)?[0];
        let n = x.len();
        let dtheta: Vec<Vec<f64>> = (0..n).map(|i| th.iter().map(|t| t.deriv(i)).collect()).collect();
        let da: Vec<f64> = (0..n).map(|i| ad.deriv(i)).collect();
        let b = solve_coefficients(&da, &dtheta, self.opts.det_eps)?;
        let theta: Vec<f64> = th.iter().map(|t| t.v).collect();
        let nuv: Vec<f64> = nud.iter().map(|v| v.v).collect();
        let f = assemble(ad.v, &nuv, &theta, &b);
        Ok(Direct { f, b, theta, rotation: None, chart_pole: false })
    }

    /// Direct solve, rotating the chart when it hits a pole. No extension.
    pub fn direct(&self, x: &[f64]) -> Result<Direct> {
        match self.solve(&self.data.nu, x) {
            Err(Error::ChartPole { .. }) => {}
            other => return other,
        }
        let mut last = Error::Unresolved;
        for (k, (r, nu)) in self.rotations.iter().enumerate() {
            match self.solve(nu, x) {
                Ok(mut d) => {
                    d.f = apply_transpose(r, &d.f);
                    d.rotation = Some(k);
                    d.chart_pole = true;
                    return Ok(d);
                }
                Err(Error::ChartPole { .. }) => {}
                Err(e) => {
                    last = e;
                    break;
                }
            }
        }
        if let Error::Unresolved = last {
            return Err(Error::ChartPole { index: 0, product: 0.0 });
        }
        Err(last)
    }

    /// Extension by probe-and-extrapolate (probes never extend recursively).
    pub fn extend(&self, x: &[f64]) -> Option<PointRecovery> {
        let ext = &self.opts.extension;
        let r = extend_with(&self.probes, ext.order, ext.max_error, |p, t| {
            let y: Vec<f64> = x.iter().zip(&self.probes[p].direction).map(|(a, d)| a + t * d).collect();
            self.direct(&y).ok().map(|d| (d.f, d.b))
        })?;
        Some(PointRecovery {
            f: r.f,
            b: r.b,
            status: NodeStatus::ExtendedByLimit,
            chart_pole: false,
            rotation: None,
            extrapolation_error: Some(r.error),
        })
    }

    pub fn recover(&self, x: &[f64]) -> PointRecovery {
        match self.direct(x) {
            Ok(d) => PointRecovery::from_direct(d),
            Err(Error::DimensionMismatch { .. }) => PointRecovery::unresolved(self.data.n(), NodeStatus::Unresolved),
            Err(e) => {
                let pole = matches!(e, Error::ChartPole { .. });
                let mut r =
                    self.extend(x).unwrap_or_else(|| PointRecovery::unresolved(self.data.n(), NodeStatus::Unresolved));
                r.chart_pole |= pole;
                r
            }
        }
    }

    fn height_residual(&self, x: &[f64], f: &[f64]) -> Option<f64> {
        let nu = self.data.nu.eval(x).ok()?;
        let a = self.data.a.eval(x).ok()?[0];
        let fn_: f64 = f.iter().zip(&nu).map(|(p, q)| p * q).sum();
        Some((fn_ - a).abs() / (1.0 + a.abs()))
    }

    /// max over axes of |∂ᵢf · ν| by central differences of the direct solve.
    fn tangency_residual(&self, x: &[f64]) -> Option<f64> {
        let nu = self.data.nu.eval(x).ok()?;
        let mut worst = 0.0f64;
        let mut y = x.to_vec();
        for i in 0..x.len() {
            let h = fd_step(x[i]);
            y[i] = x[i] + h;
            let fp = self.direct(&y).ok()?.f;
            y[i] = x[i] - h;
            let fm = self.direct(&y).ok()?.f;
            y[i] = x[i];
            let d: f64 = fp.iter().zip(&fm).zip(&nu).map(|((p, m), v)| (p - m) / (2.0 * h) * v).sum();
            worst = worst.max(d.abs());
        }
        Some(worst)
    }

    pub fn recover_grid(&self, grid: &Grid) -> Result<RecoveredMap> {
        let n = self.data.n();
        if grid.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: grid.dim() });
        }
        let per_node: Vec<(PointRecovery, NodeDiagnostics)> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let x = grid.point_flat(k);
                let r = if self.data.is_excluded(&x) {
                    PointRecovery::unresolved(n, NodeStatus::Masked)
                } else {
                    self.recover(&x)
                };
                let (mut tan, mut hgt) = (None, None);
                if self.opts.residuals && r.status.is_resolved() {
                    hgt = self.height_residual(&x, &r.f);
                    if r.status == NodeStatus::Regular {
                        tan = self.tangency_residual(&x);
                    }
                }
                let diag = NodeDiagnostics {
                    status: r.status,
                    chart_pole: r.chart_pole,
                    rotation: r.rotation,
                    tangency_residual: tan,
                    height_residual: hgt,
                    extrapolation_error: r.extrapolation_error,
                };
                (r, diag)
            })
            .collect();
        let mut f = Vec::with_capacity(grid.len() * (n + 1));
        let mut b = Vec::with_capacity(grid.len() * n);
        let mut nodes = Vec::with_capacity(grid.len());
        for (r, d) in per_node {
            f.extend(r.f);
            b.extend(r.b);
            nodes.push(d);
        }
        let mut out = RecoveredMap {
            grid: grid.clone(),
            n,
            f,
            b,
            nodes,
            rotations: self.rotations(),
            summary: Summary::default(),
        };
        out.summarize();
        Ok(out)
    }
}
