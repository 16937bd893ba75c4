//! JSON documents for sampled Legendre data and recovery results.
//!
//! Numbers are written in shortest round-trip form; non-finite values are
//! written as `null`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::recovery::{RecoveredMap, SampledData, Summary};

pub const FORMAT_VERSION: u32 = 1;

fn to_opt(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

fn from_opt(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|x| x.unwrap_or(f64::NAN)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataFile {
    pub version: u32,
    pub n: usize,
    pub axes: Vec<Vec<f64>>,
    /// n+1 values per node, first axis slowest.
    pub nu: Vec<Option<f64>>,
    pub a: Vec<Option<f64>>,
    pub mask: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl DataFile {
    pub fn from_sampled(data: &SampledData, source: Option<String>) -> Self {
        DataFile {
            version: FORMAT_VERSION,
            n: data.grid().dim(),
            axes: data.grid().axes.clone(),
            nu: to_opt(&data.nu.values),
            a: to_opt(&data.a.values),
            mask: data.mask.clone(),
            source,
        }
    }

    pub fn to_sampled(&self) -> Result<SampledData> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Invalid(format!("unsupported data version {}", self.version)));
        }
        let grid = Grid::new(self.axes.clone())?;
        if grid.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: grid.dim() });
        }
        SampledData::new(
            GridField::new(grid.clone(), self.n + 1, from_opt(&self.nu))?,
            GridField::new(grid, 1, from_opt(&self.a))?,
            self.mask.clone(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub version: u32,
    pub n: usize,
    pub axes: Vec<Vec<f64>>,
    pub f: Vec<Option<f64>>,
    pub b: Vec<Option<f64>>,
    pub status: Vec<String>,
    pub tangency: Vec<Option<f64>>,
    pub height: Vec<Option<f64>>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl ResultFile {
    pub fn from_recovered(r: &RecoveredMap, source: Option<String>) -> Self {
        ResultFile {
            version: FORMAT_VERSION,
            n: r.n,
            axes: r.grid.axes.clone(),
            f: to_opt(&r.f),
            b: to_opt(&r.b),
            status: r.nodes.iter().map(|d| d.status.as_str().to_string()).collect(),
            tangency: r.nodes.iter().map(|d| d.tangency_residual.filter(|v| v.is_finite())).collect(),
            height: r.nodes.iter().map(|d| d.height_residual.filter(|v| v.is_finite())).collect(),
            summary: r.summary.clone(),
            source,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.axes.clone())
    }

    /// Recovered value at node k, `None` unless resolved.
    pub fn f_at(&self, k: usize) -> Option<Vec<f64>> {
        let m = self.n + 1;
        self.f[k * m..(k + 1) * m].iter().copied().collect()
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(Error::from)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&s)?)
}
