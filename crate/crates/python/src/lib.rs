//! Python bindings: gallery lookups, the sphere frame, point and grid
//! recovery, the double limit and sampled-data files.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use frontal::gallery::{self, GalleryEntry};
use frontal::grid::Grid;
use frontal::io::{read_json, write_json, DataFile, ResultFile};
use frontal::perturbation::{limit_recover, LimitOptions};
use frontal::recovery::{self, LegendreData, RecoveredMap, RecoveryOptions, SampledData};
use frontal::singularities;
use frontal::sphere::{self, DEFAULT_POLE_EPS};

fn err(e: frontal::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn options(det_eps: Option<f64>, pole_eps: Option<f64>, seed: u64) -> RecoveryOptions {
    let mut o = RecoveryOptions { seed, ..RecoveryOptions::default() };
    if let Some(v) = det_eps {
        o.det_eps = v;
    }
    if let Some(v) = pole_eps {
        o.pole_eps = v;
    }
    o
}

/// Unit vector ν(θ) on Sⁿ.
#[pyfunction]
fn nu_sphere(theta: Vec<f64>) -> Vec<f64> {
    sphere::nu_sphere(&theta)
}

/// (ν, μ̂₁…μ̂ₙ, ρ₁…ρₙ) at θ.
#[pyfunction]
fn frame(theta: Vec<f64>) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let f = sphere::frame_unchecked(&theta);
    (f.nu, f.mu_hat, f.rho)
}

#[pyfunction]
#[pyo3(signature = (v, pole_eps = DEFAULT_POLE_EPS))]
fn extract_angles(v: Vec<f64>, pole_eps: f64) -> PyResult<Vec<f64>> {
    sphere::extract_angles(&v, pole_eps).map_err(err)
}

/// The n+1 maximal minors of an (n+1)×n matrix given by rows.
#[pyfunction]
fn minors(rows: Vec<Vec<f64>>) -> Vec<f64> {
    singularities::minors_of(&rows)
}

#[pyfunction]
fn phi(rows: Vec<Vec<f64>>) -> f64 {
    singularities::minors_of(&rows).iter().map(|m| m * m).sum()
}

#[pyfunction]
fn examples() -> Vec<&'static str> {
    gallery::names()
}

#[pyclass(frozen, name = "Example")]
struct PyExample {
    entry: GalleryEntry,
}

#[pymethods]
impl PyExample {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(PyExample { entry: gallery::lookup(name).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.entry.name
    }

    #[getter]
    fn n(&self) -> usize {
        self.entry.n
    }

    #[getter]
    fn has_family(&self) -> bool {
        self.entry.has_family
    }

    /// (item, stated, corrected) for every recorded correction.
    #[getter]
    fn errata(&self) -> Vec<(&'static str, &'static str, &'static str)> {
        self.entry.errata.iter().map(|e| (e.item, e.stated, e.corrected)).collect()
    }

    /// The map f, or the stage map f_k when a stage is given.
    #[pyo3(signature = (x, stage = None))]
    fn f(&self, x: Vec<f64>, stage: Option<u32>) -> PyResult<Vec<f64>> {
        let m = match stage {
            Some(k) => self.entry.stage_map(Some(k)),
            None => Ok(self.entry.f()),
        };
        m.and_then(|m| m.eval(&x)).map_err(err)
    }

    #[pyo3(signature = (x, stage = None))]
    fn nu(&self, x: Vec<f64>, stage: Option<u32>) -> PyResult<Vec<f64>> {
        self.entry.nu_closed(stage).and_then(|m| m.eval(&x)).map_err(err)
    }

    #[pyo3(signature = (x, stage = None))]
    fn a(&self, x: Vec<f64>, stage: Option<u32>) -> PyResult<f64> {
        self.entry.a_closed(stage).and_then(|m| m.eval(&x)).map(|v| v[0]).map_err(err)
    }

    /// Stated coefficient formulas b evaluated at x.
    #[pyo3(signature = (x, stage = None))]
    fn oracle_b(&self, x: Vec<f64>, stage: Option<u32>) -> PyResult<Vec<f64>> {
        gallery::oracle_b(&self.entry, stage, &x).map_err(err)
    }

    fn is_regular(&self, x: Vec<f64>) -> bool {
        self.entry.regular_set_predicate(&x)
    }

    fn __repr__(&self) -> String {
        format!("Example('{}')", self.entry.name)
    }
}

#[pyclass(frozen, get_all)]
struct PointResult {
    f: Vec<f64>,
    b: Vec<f64>,
    status: &'static str,
    chart_pole: bool,
}

#[pymethods]
impl PointResult {
    fn __repr__(&self) -> String {
        format!("PointResult(f={:?}, status='{}')", self.f, self.status)
    }
}

/// Recovers f(x) from the example's Legendre data.
#[pyfunction]
#[pyo3(signature = (example, x, stage = None, det_eps = None, pole_eps = None, seed = 0))]
fn recover_point(
    example: &str,
    x: Vec<f64>,
    stage: Option<u32>,
    det_eps: Option<f64>,
    pole_eps: Option<f64>,
    seed: u64,
) -> PyResult<PointResult> {
    let data = gallery::lookup(example).and_then(|e| e.legendre_data(stage)).map_err(err)?;
    let r = recovery::recover_point(&data, &x, &options(det_eps, pole_eps, seed)).map_err(err)?;
    Ok(PointResult { f: r.f, b: r.b, status: r.status.as_str(), chart_pole: r.chart_pole })
}

#[pyclass(frozen, get_all)]
struct GridResult {
    axes: Vec<Vec<f64>>,
    /// One entry per node, `None` where unresolved or masked.
    f: Vec<Option<Vec<f64>>>,
    status: Vec<&'static str>,
    regular: usize,
    extended: usize,
    unresolved: usize,
    masked: usize,
}

impl GridResult {
    fn from_map(m: &RecoveredMap) -> Self {
        let f = (0..m.grid.len()).map(|k| m.nodes[k].status.is_resolved().then(|| m.f_at(k).to_vec())).collect();
        GridResult {
            axes: m.grid.axes.clone(),
            f,
            status: m.nodes.iter().map(|d| d.status.as_str()).collect(),
            regular: m.summary.regular,
            extended: m.summary.extended,
            unresolved: m.summary.unresolved,
            masked: m.summary.masked,
        }
    }
}

/// Grid recovery; `backend` is "exact" or "fd" (sampled first).
#[pyfunction]
#[pyo3(signature = (example, grid, stage = None, backend = "exact", seed = 0))]
fn recover_grid(example: &str, grid: &str, stage: Option<u32>, backend: &str, seed: u64) -> PyResult<GridResult> {
    let data = gallery::lookup(example).and_then(|e| e.legendre_data(stage)).map_err(err)?;
    let grid = Grid::parse(grid).map_err(err)?;
    let data = match backend {
        "exact" => LegendreData::Analytic(data),
        "fd" => LegendreData::Sampled(SampledData::from_analytic(&data, &grid).map_err(err)?),
        other => return Err(PyValueError::new_err(format!("unknown backend '{other}'"))),
    };
    let m = recovery::recover_grid(&data, &grid, &options(None, None, seed)).map_err(err)?;
    Ok(GridResult::from_map(&m))
}

/// Samples an example's Legendre data to a JSON data file.
#[pyfunction]
#[pyo3(signature = (example, grid, path, stage = None))]
fn sample(example: &str, grid: &str, path: PathBuf, stage: Option<u32>) -> PyResult<usize> {
    let entry = gallery::lookup(example).map_err(err)?;
    let data = entry.legendre_data(stage).map_err(err)?;
    let grid = Grid::parse(grid).map_err(err)?;
    let s = SampledData::from_analytic(&data, &grid).map_err(err)?;
    let tag = match stage {
        Some(k) => format!("{example}:{k}"),
        None => example.to_string(),
    };
    write_json(&path, &DataFile::from_sampled(&s, Some(tag))).map_err(err)?;
    Ok(s.mask.iter().filter(|m| !**m).count())
}

/// Finite-difference recovery from a data file; writes a result file when `out` is given.
#[pyfunction]
#[pyo3(signature = (path, out = None, seed = 0))]
fn recover_file(path: PathBuf, out: Option<PathBuf>, seed: u64) -> PyResult<GridResult> {
    let file: DataFile = read_json(&path).map_err(err)?;
    let data = file.to_sampled().map_err(err)?;
    let grid = data.grid().clone();
    let m = recovery::recover_grid(&LegendreData::Sampled(data), &grid, &options(None, None, seed)).map_err(err)?;
    if let Some(o) = out {
        write_json(&o, &ResultFile::from_recovered(&m, file.source)).map_err(err)?;
    }
    Ok(GridResult::from_map(&m))
}

#[pyclass(frozen, get_all)]
struct LimitResult {
    value: Vec<f64>,
    error: f64,
    stages: Vec<(u32, Vec<f64>)>,
    failed: Vec<u32>,
}

/// Double-limit estimate of f(x) from stages 1, 2, 4, 8, 16 of a family.
#[pyfunction]
#[pyo3(signature = (example, x, stages = vec![1, 2, 4, 8, 16]))]
fn limit(example: &str, x: Vec<f64>, stages: Vec<u32>) -> PyResult<LimitResult> {
    let entry = gallery::lookup(example).map_err(err)?;
    let opts = LimitOptions { power: 1, ..LimitOptions::default() };
    let s = limit_recover(|l| entry.legendre_data(Some(l)), &stages, &x, &opts).map_err(err)?;
    Ok(LimitResult {
        value: s.value,
        error: s.error,
        stages: s.stages.into_iter().map(|v| (v.stage, v.value)).collect(),
        failed: s.failed,
    })
}

#[pymodule]
fn pyfrontal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExample>()?;
    m.add_class::<PointResult>()?;
    m.add_class::<GridResult>()?;
    m.add_class::<LimitResult>()?;
    m.add_function(wrap_pyfunction!(nu_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(frame, m)?)?;
    m.add_function(wrap_pyfunction!(extract_angles, m)?)?;
    m.add_function(wrap_pyfunction!(minors, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add_function(wrap_pyfunction!(recover_point, m)?)?;
    m.add_function(wrap_pyfunction!(recover_grid, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(recover_file, m)?)?;
    m.add_function(wrap_pyfunction!(limit, m)?)?;
    Ok(())
}
