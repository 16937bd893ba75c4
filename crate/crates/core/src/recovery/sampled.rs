//! Recovery from sampled grids with finite-difference derivatives.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::extension::{extend_with, Probe};
use super::rotation::{apply, apply_transpose, random_rotation};
use super::{
    assemble, Direct, NodeDiagnostics, NodeStatus, PointRecovery, RecoveredMap, RecoveryOptions, SampledData, Summary,
};
use crate::error::{Error, Result};
use crate::grid::jacobian_fd_wide;
use crate::linalg::solve_coefficients;
use crate::sphere::{extract_angles, frame_unchecked};

/// Multiple of ε/h below which a finite-difference row counts as zero.
const FD_NOISE: f64 = 1e3;

pub struct SampledRecoverer<'a> {
    data: &'a SampledData,
    opts: &'a RecoveryOptions,
    rotations: Vec<Vec<Vec<f64>>>,
    /// Probe offsets in nodes: ±eᵢ with distances 2^{levels-1}, …, 2, 1.
    probes: Vec<(usize, isize)>,
    offsets: Vec<usize>,
    h_min: f64,
}

impl<'a> SampledRecoverer<'a> {
    pub fn new(data: &'a SampledData, opts: &'a RecoveryOptions) -> Result<Self> {
        let n = data.grid().dim();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let rotations = (0..opts.max_rotations).map(|_| random_rotation(n + 1, &mut rng)).collect();
        let probes = (0..n).flat_map(|i| [(i, 1isize), (i, -1isize)]).collect();
        let offsets = (0..opts.extension.levels).rev().map(|k| 1usize << k).collect();
        let h_min = data.grid().spacing()?.into_iter().fold(f64::INFINITY, f64::min);
        Ok(SampledRecoverer { data, opts, rotations, probes, offsets, h_min })
    }

    fn solve(&self, idx: &[usize], rot: Option<&Vec<Vec<f64>>>) -> Result<Direct> {
        let grid = self.data.grid();
        let k = grid.flat_index(idx);
        if !self.data.mask[k] {
            return Err(Error::Domain("masked node".into()));
        }
        let mut nu = self.data.nu.at_flat(k).to_vec();
        let a = self.data.a.at_flat(k)[0];
        let jn = jacobian_fd_wide(&self.data.nu, idx, self.opts.fd_points)?;
        let ja = jacobian_fd_wide(&self.data.a, idx, self.opts.fd_points)?;
        let n = grid.dim();
        // columns of the normal's Jacobian, possibly rotated
        let mut cols: Vec<Vec<f64>> = (0..n).map(|i| jn.column(i).iter().copied().collect()).collect();
        if let Some(r) = rot {
            nu = apply(r, &nu);
            cols = cols.iter().map(|c| apply(r, c)).collect();
        }
        if nu.iter().chain(cols.iter().flatten()).any(|v| !v.is_finite()) || !a.is_finite() {
            return Err(Error::Domain("non-finite sample in stencil".into()));
        }
        let theta = extract_angles(&nu, self.opts.pole_eps)?;
        let fr = frame_unchecked(&theta);
        // ∂ν/∂xᵢ = Σⱼ ρⱼ μ̂ⱼ ∂θⱼ/∂xᵢ, so ∂θⱼ/∂xᵢ = μ̂ⱼ·∂ᵢν / ρⱼ
        let dtheta: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| (0..n).map(|j| fr.mu_hat[j].iter().zip(c).map(|(m, v)| m * v).sum::<f64>() / fr.rho[j]).collect())
            .collect();
        // rows at rounding level carry no derivative information, and the
        // row-normalized determinant test cannot see that
        let noise = FD_NOISE * f64::EPSILON / self.h_min;
        if let Some(row) = dtheta.iter().find(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt() < noise) {
            let ratio = row.iter().map(|v| v * v).sum::<f64>().sqrt() / noise;
            return Err(Error::SingularChart { ratio });
        }
        let da: Vec<f64> = (0..n).map(|i| ja[(0, i)]).collect();
        let b = solve_coefficients(&da, &dtheta, self.opts.det_eps)?;
        let f = assemble(a, &nu, &theta, &b);
        Ok(Direct { f, b, theta, rotation: None, chart_pole: false })
    }

    pub fn direct(&self, idx: &[usize]) -> Result<Direct> {
        match self.solve(idx, None) {
            Err(Error::ChartPole { .. }) => {}
            other => return other,
        }
        for (k, r) in self.rotations.iter().enumerate() {
            match self.solve(idx, Some(r)) {
                Ok(mut d) => {
                    d.f = apply_transpose(r, &d.f);
                    d.rotation = Some(k);
                    d.chart_pole = true;
                    return Ok(d);
                }
                Err(Error::ChartPole { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Err(Error::ChartPole { index: 0, product: 0.0 })
    }

    /// Extension along grid lines using nodes at distances 8h, 4h, 2h, h.
    pub fn extend(&self, idx: &[usize]) -> Option<PointRecovery> {
        let grid = self.data.grid();
        let h = grid.spacing().ok()?;
        let probes: Vec<Probe> = self
            .probes
            .iter()
            .map(|&(i, s)| {
                let mut direction = vec![0.0; idx.len()];
                direction[i] = s as f64;
                Probe { direction, steps: self.offsets.iter().map(|&o| o as f64 * h[i]).collect() }
            })
            .collect();
        let ext = &self.opts.extension;
        let r = extend_with(&probes, ext.order, ext.max_error, |p, t| {
            let (axis, sign) = self.probes[p];
            let off = (t / h[axis]).round() as isize * sign;
            let j = idx[axis] as isize + off;
            if j < 0 || j >= grid.axes[axis].len() as isize {
                return None;
            }
            let mut other = idx.to_vec();
            other[axis] = j as usize;
            self.direct(&other).ok().map(|d| (d.f, d.b))
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

    pub fn recover_node(&self, idx: &[usize]) -> PointRecovery {
        let n = idx.len();
        let k = self.data.grid().flat_index(idx);
        if !self.data.mask[k] {
            return PointRecovery::unresolved(n, NodeStatus::Masked);
        }
        match self.direct(idx) {
            Ok(d) => PointRecovery::from_direct(d),
            Err(e) => {
                let pole = matches!(e, Error::ChartPole { .. });
                let mut r = self.extend(idx).unwrap_or_else(|| PointRecovery::unresolved(n, NodeStatus::Unresolved));
                r.chart_pole |= pole;
                r
            }
        }
    }

    pub fn recover_grid(&self) -> Result<RecoveredMap> {
        let grid = self.data.grid();
        let n = grid.dim();
        let recs: Vec<PointRecovery> =
            (0..grid.len()).into_par_iter().map(|k| self.recover_node(&grid.multi_index(k))).collect();
        let mut f = Vec::with_capacity(grid.len() * (n + 1));
        let mut b = Vec::with_capacity(grid.len() * n);
        for r in &recs {
            f.extend_from_slice(&r.f);
            b.extend_from_slice(&r.b);
        }
        let nodes: Vec<NodeDiagnostics> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let r = &recs[k];
                let (mut tan, mut hgt) = (None, None);
                if self.opts.residuals && r.status.is_resolved() {
                    let nu = self.data.nu.at_flat(k);
                    let a = self.data.a.at_flat(k)[0];
                    if nu.iter().all(|v| v.is_finite()) && a.is_finite() {
                        let fnu: f64 = r.f.iter().zip(nu).map(|(p, q)| p * q).sum();
                        hgt = Some((fnu - a).abs() / (1.0 + a.abs()));
                    }
                    if r.status == NodeStatus::Regular {
                        tan = self.grid_tangency(&recs, k);
                    }
                }
                NodeDiagnostics {
                    status: r.status,
                    chart_pole: r.chart_pole,
                    rotation: r.rotation,
                    tangency_residual: tan,
                    height_residual: hgt,
                    extrapolation_error: r.extrapolation_error,
                }
            })
            .collect();
        let mut out = RecoveredMap {
            grid: grid.clone(),
            n,
            f,
            b,
            nodes,
            rotations: self.rotations.clone(),
            summary: Summary::default(),
        };
        out.summarize();
        Ok(out)
    }

    /// Central differences of the recovered grid values dotted with ν.
    fn grid_tangency(&self, recs: &[PointRecovery], k: usize) -> Option<f64> {
        let grid = self.data.grid();
        let idx = grid.multi_index(k);
        if !grid.is_interior(&idx) {
            return None;
        }
        let h = grid.spacing().ok()?;
        let nu = self.data.nu.at_flat(k);
        let mut worst = 0.0f64;
        let mut j = idx.clone();
        for i in 0..idx.len() {
            j[i] = idx[i] + 1;
            let p = &recs[grid.flat_index(&j)];
            j[i] = idx[i] - 1;
            let m = &recs[grid.flat_index(&j)];
            j[i] = idx[i];
            if !(p.status.is_resolved() && m.status.is_resolved()) {
                return None;
            }
            let d: f64 = p.f.iter().zip(&m.f).zip(nu).map(|((a, b), v)| (a - b) / (2.0 * h[i]) * v).sum();
            worst = worst.max(d.abs());
        }
        Some(worst)
    }
}
