//! Wavefront OBJ export of surfaces sampled on 2D grids.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Triangulated surface: two triangles per grid cell, cells touching a
/// missing vertex dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// 0-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// `values(k)` gives the point at flat node k, or `None` to omit it.
    pub fn from_grid(grid: &Grid, values: impl Fn(usize) -> Option<[f64; 3]>) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::DimensionUnsupported(grid.dim()));
        }
        let shape = grid.shape();
        let mut index = vec![None; grid.len()];
        let mut vertices = Vec::new();
        for (k, slot) in index.iter_mut().enumerate() {
            if let Some(p) = values(k).filter(|p| p.iter().all(|v| v.is_finite())) {
                *slot = Some(vertices.len());
                vertices.push(p);
            }
        }
        let mut faces = Vec::new();
        for i in 0..shape[0] - 1 {
            for j in 0..shape[1] - 1 {
                let at = |a: usize, b: usize| index[grid.flat_index(&[a, b])];
                if let (Some(p00), Some(p10), Some(p01), Some(p11)) =
                    (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1))
                {
                    faces.push([p00, p10, p11]);
                    faces.push([p00, p11, p01]);
                }
            }
        }
        Ok(Mesh { vertices, faces })
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }
}
