//! Rectangular grids, sampled fields and finite-difference Jacobians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIFORM_TOL: f64 = 1e-12;

/// Tensor-product grid; the first axis varies slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
}

/// Evenly spaced nodes; written as a convex combination so the endpoints and
/// a symmetric midpoint come out exact.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let d = (count - 1) as f64;
    (0..count).map(|i| (min * (d - i as f64) + max * i as f64) / d).collect()
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("no axes".into()));
        }
        for (k, ax) in axes.iter().enumerate() {
            if ax.len() < 3 {
                return Err(Error::InvalidGrid(format!("axis {k} has fewer than 3 nodes")));
            }
            if ax.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidGrid(format!("axis {k} is not strictly increasing")));
            }
        }
        Ok(Grid { axes })
    }

    /// `count` nodes on `[min, max]` along each of `n` axes.
    pub fn cube(n: usize, min: f64, max: f64, count: usize) -> Result<Self> {
        Grid::new(vec![linspace(min, max, count); n])
    }

    /// Parses "min:max:count[,min:max:count…]".
    pub fn parse(spec: &str) -> Result<Self> {
        let axes = spec
            .split(',')
            .map(|part| {
                let f: Vec<&str> = part.trim().split(':').collect();
                if f.len() != 3 {
                    return Err(Error::InvalidGrid(format!("bad axis spec '{part}'")));
                }
                let bad = |_| Error::InvalidGrid(format!("bad number in '{part}'"));
                let min: f64 = f[0].trim().parse().map_err(bad)?;
                let max: f64 = f[1].trim().parse().map_err(bad)?;
                let count: usize =
                    f[2].trim().parse().map_err(|_| Error::InvalidGrid(format!("bad count in '{part}'")))?;
                if !(min.is_finite() && max.is_finite() && max > min) {
                    return Err(Error::InvalidGrid(format!("empty interval in '{part}'")));
                }
                Ok(linspace(min, max, count))
            })
            .collect::<Result<Vec<_>>>()?;
        Grid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            let c = self.axes[k].len();
            idx[k] = flat % c;
            flat /= c;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, ax)| acc * ax.len() + i)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(&i, ax)| ax[i]).collect()
    }

    pub fn point_flat(&self, flat: usize) -> Vec<f64> {
        self.point(&self.multi_index(flat))
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point_flat(i)).collect()
    }

    /// Uniform step per axis.
    pub fn spacing(&self) -> Result<Vec<f64>> {
        self.axes
            .iter()
            .enumerate()
            .map(|(k, ax)| {
                let h = (ax[ax.len() - 1] - ax[0]) / (ax.len() - 1) as f64;
                let scale = ax[0].abs().max(ax[ax.len() - 1].abs()).max(h);
                if ax.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > UNIFORM_TOL * scale.max(1.0)) {
                    return Err(Error::InvalidGrid(format!("axis {k} is not uniform")));
                }
                Ok(h)
            })
            .collect()
    }

    /// True when every axis index is strictly inside its range.
    pub fn is_interior(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.axes).all(|(&i, ax)| i > 0 && i + 1 < ax.len())
    }

    /// Largest side length of the bounding box.
    pub fn scale(&self) -> f64 {
        self.axes.iter().map(|ax| ax[ax.len() - 1] - ax[0]).fold(0.0, f64::max)
    }
}

/// A grid with an m-vector per node (stored node-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub m: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * m {
            return Err(Error::InvalidGrid(format!(
                "value array has {} entries, expected {}",
                values.len(),
                grid.len() * m
            )));
        }
        grid.spacing()?;
        Ok(GridField { grid, m, values })
    }

    /// Samples `f` at every node; failing nodes get NaN.
    pub fn sample(grid: Grid, m: usize, f: impl Fn(&[f64]) -> Option<Vec<f64>>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * m);
        for p in grid.points() {
            match f(&p) {
                Some(v) if v.len() == m => values.extend(v),
                _ => values.extend(std::iter::repeat_n(f64::NAN, m)),
            }
        }
        GridField::new(grid, m, values)
    }

    pub fn at(&self, idx: &[usize]) -> &[f64] {
        let k = self.grid.flat_index(idx);
        &self.values[k * self.m..(k + 1) * self.m]
    }

    pub fn at_flat(&self, k: usize) -> &[f64] {
        &self.values[k * self.m..(k + 1) * self.m]
    }
}

/// Second-order Jacobian estimate (m×n): central differences inside,
/// one-sided three-point stencils on the boundary.
pub fn jacobian_fd(field: &GridField, idx: &[usize]) -> Result<DMatrix<f64>> {
    let grid = &field.grid;
    let n = grid.dim();
    if idx.len() != n || idx.iter().zip(&grid.axes).any(|(&i, ax)| i >= ax.len()) {
        return Err(Error::InvalidGrid("node index out of bounds".into()));
    }
    let h = grid.spacing()?;
    let mut jac = DMatrix::zeros(field.m, n);
    let mut probe = idx.to_vec();
    for i in 0..n {
        let c = grid.axes[i].len();
        let k = idx[i];
        let mut val = |off: isize| {
            probe[i] = (k as isize + off) as usize;
            let v = field.at(&probe).to_vec();
            probe[i] = k;
            v
        };
        let col: Vec<f64> = if k == 0 {
            let (a, b, d) = (val(0), val(1), val(2));
            (0..field.m).map(|j| (-3.0 * a[j] + 4.0 * b[j] - d[j]) / (2.0 * h[i])).collect()
        } else if k + 1 == c {
            let (a, b, d) = (val(0), val(-1), val(-2));
            (0..field.m).map(|j| (3.0 * a[j] - 4.0 * b[j] + d[j]) / (2.0 * h[i])).collect()
        } else {
            let (p, m) = (val(1), val(-1));
            (0..field.m).map(|j| (p[j] - m[j]) / (2.0 * h[i])).collect()
        };
        for j in 0..field.m {
            jac[(j, i)] = col[j];
        }
    }
    Ok(jac)
}

/// Weights of the first derivative at 0 for samples at integer `offsets`
/// (unit spacing), from the derivatives of the Lagrange basis.
pub fn derivative_weights(offsets: &[isize]) -> Vec<f64> {
    let o: Vec<f64> = offsets.iter().map(|&v| v as f64).collect();
    (0..o.len())
        .map(|j| {
            let denom: f64 = (0..o.len()).filter(|&m| m != j).map(|m| o[j] - o[m]).product();
            let num: f64 = (0..o.len())
                .filter(|&l| l != j)
                .map(|l| (0..o.len()).filter(|&m| m != j && m != l).map(|m| -o[m]).product::<f64>())
                .sum();
            num / denom
        })
        .collect()
}

/// Jacobian estimate from `points`-node stencils (odd, order points − 1):
/// centred inside, shifted inward near the boundary. Axes shorter than the
/// stencil, and stencils that meet a non-finite sample, use [`jacobian_fd`].
pub fn jacobian_fd_wide(field: &GridField, idx: &[usize], points: usize) -> Result<DMatrix<f64>> {
    if points < 3 || points % 2 == 0 {
        return Err(Error::Invalid(format!("stencil width must be odd and at least 3, got {points}")));
    }
    let (p, half) = (points as isize, points as isize / 2);
    let mut jac = jacobian_fd(field, idx)?;
    let grid = &field.grid;
    let h = grid.spacing()?;
    let mut probe = idx.to_vec();
    for i in 0..grid.dim() {
        let c = grid.axes[i].len() as isize;
        if c < p {
            continue;
        }
        let k = idx[i] as isize;
        let start = (k - half).clamp(0, c - p);
        let offsets: Vec<isize> = (start - k..start - k + p).collect();
        let w = derivative_weights(&offsets);
        let mut d = vec![0.0; field.m];
        for (&off, wk) in offsets.iter().zip(&w) {
            probe[i] = (k + off) as usize;
            for (dj, v) in d.iter_mut().zip(field.at(&probe)) {
                *dj += wk * v / h[i];
            }
        }
        probe[i] = idx[i];
        for (j, dj) in d.into_iter().enumerate() {
            if dj.is_finite() {
                jac[(j, i)] = dj;
            }
        }
    }
    Ok(jac)
}

/// Standard central-difference step (ε^{1/3}·max(1, |x|)).
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}
