//! Linear and quadratic perturbations, decay schedules and the double-limit
//! recovery of a frontal from a sequence of perturbed Legendre data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::map::{DifferentiableMap, DotProduct, Formula};
use crate::recovery::{AnalyticData, AnalyticRecoverer, BoxDomain, NodeStatus, RecoveryOptions};
use crate::richardson::neville;
use crate::singularities::{classify, GaussMap, DEFAULT_RANK_EPS};

/// Fraction of grid nodes that must be regular for a stage to be accepted.
pub const MIN_REGULAR_FRACTION: f64 = 0.99;

struct Linear {
    f: DifferentiableMap,
    c: Vec<Vec<f64>>,
}

impl Formula for Linear {
    fn dim_in(&self) -> usize {
        self.f.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.f.dim_out()
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let mut v = self.f.eval_at(x)?;
        for (vj, row) in v.iter_mut().zip(&self.c) {
            for (xi, c) in x.iter().zip(row) {
                *vj += *xi * *c;
            }
        }
        Ok(v)
    }
    fn label(&self) -> String {
        format!("{} + Cx", self.f.label())
    }
}

struct Quadratic {
    f: DifferentiableMap,
    c: Vec<f64>,
    /// F(x₀), the first n components at the base point.
    f0: Vec<f64>,
}

impl Formula for Quadratic {
    fn dim_in(&self) -> usize {
        self.f.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.f.dim_out()
    }
    fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let mut v = self.f.eval_at(x)?;
        let n = self.c.len();
        let mut q = T::zero();
        for i in 0..n {
            let d = v[i] - self.f0[i];
            q += d * d * self.c[i];
        }
        v[n] += q * 0.5;
        Ok(v)
    }
    fn label(&self) -> String {
        format!("{} + c·F²/2", self.f.label())
    }
}

/// (f + C)(x) = (f₁(x) + c₁·x, …, fₙ₊₁(x) + cₙ₊₁·x).
pub fn linear_perturb(f: &DifferentiableMap, c: &[Vec<f64>]) -> Result<DifferentiableMap> {
    let n = f.dim_in();
    if c.len() != f.dim_out() {
        return Err(Error::DimensionMismatch { expected: f.dim_out(), got: c.len() });
    }
    if let Some(row) = c.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    Ok(DifferentiableMap::new(Linear { f: f.clone(), c: c.to_vec() }))
}

/// Adds ½ Σᵢ cᵢ (Fᵢ(x) − Fᵢ(x₀))² to the last component, F being the first n
/// components of f.
pub fn quadratic_perturb(f: &DifferentiableMap, c: &[f64], x0: &[f64]) -> Result<DifferentiableMap> {
    let n = f.dim_in();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    let mut f0 = f.eval(x0)?;
    f0.truncate(n);
    Ok(DifferentiableMap::new(Quadratic { f: f.clone(), c: c.to_vec(), f0 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Linear,
    Quadratic,
}

/// ℓ ↦ base · s_ℓ with s_ℓ = 1/(ℓ²(1 + |base|)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub base: Vec<f64>,
    pub mode: ScheduleMode,
}

impl Schedule {
    pub fn scale(&self, stage: u32) -> f64 {
        let l = stage as f64;
        1.0 / (l * l * (1.0 + norm(&self.base)))
    }

    pub fn constants(&self, stage: u32) -> Vec<f64> {
        let s = self.scale(stage);
        self.base.iter().map(|c| c * s).collect()
    }

    /// Σ c² < 1/ℓ² at this stage.
    pub fn satisfies_bound(&self, stage: u32) -> bool {
        let l = stage as f64;
        let c = self.constants(stage);
        c.iter().map(|v| v * v).sum::<f64>() < 1.0 / (l * l)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn make_schedule(base: &[f64], mode: ScheduleMode) -> Result<Schedule> {
    if base.is_empty() || base.iter().all(|c| *c == 0.0) {
        return Err(Error::Invalid("schedule base must be non-zero".into()));
    }
    if base.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid("schedule base must be finite".into()));
    }
    Ok(Schedule { base: base.to_vec(), mode })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PerturbationKind {
    /// (n+1) × n constants, flattened row-major in the schedule base.
    Linear,
    /// n constants around the base point x0.
    Quadratic { x0: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub n: usize,
    pub kind: PerturbationKind,
    pub schedule: Schedule,
}

impl PerturbationSpec {
    pub fn linear(c: &[Vec<f64>]) -> Result<Self> {
        let n = c.first().map_or(0, Vec::len);
        if c.len() != n + 1 || c.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("linear constants must be (n+1) rows of n".into()));
        }
        let flat: Vec<f64> = c.iter().flatten().copied().collect();
        Ok(PerturbationSpec {
            n,
            kind: PerturbationKind::Linear,
            schedule: make_schedule(&flat, ScheduleMode::Linear)?,
        })
    }

    pub fn quadratic(c: &[f64], x0: &[f64]) -> Result<Self> {
        if c.len() != x0.len() {
            return Err(Error::DimensionMismatch { expected: x0.len(), got: c.len() });
        }
        Ok(PerturbationSpec {
            n: c.len(),
            kind: PerturbationKind::Quadratic { x0: x0.to_vec() },
            schedule: make_schedule(c, ScheduleMode::Quadratic)?,
        })
    }

    /// Random base constants from a seeded generator.
    pub fn random(n: usize, mode: ScheduleMode, x0: &[f64], rng: &mut ChaCha8Rng) -> Result<Self> {
        match mode {
            ScheduleMode::Linear => {
                let c: Vec<Vec<f64>> = (0..=n).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
                Self::linear(&c)
            }
            ScheduleMode::Quadratic => {
                let c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                Self::quadratic(&c, x0)
            }
        }
    }

    /// The stage-ℓ perturbation of f.
    pub fn stage_map(&self, f: &DifferentiableMap, stage: u32) -> Result<DifferentiableMap> {
        if stage == 0 {
            return Err(Error::Invalid("stages start at 1".into()));
        }
        let c = self.schedule.constants(stage);
        match &self.kind {
            PerturbationKind::Linear => {
                let rows: Vec<Vec<f64>> = c.chunks(self.n).map(<[f64]>::to_vec).collect();
                linear_perturb(f, &rows)
            }
            PerturbationKind::Quadratic { x0 } => quadratic_perturb(f, &c, x0),
        }
    }
}

/// Legendre data (ν, f·ν) of a parametrization, ν the normalized cofactor vector.
pub fn legendre_data_of_map(f: &DifferentiableMap, domain: BoxDomain) -> Result<AnalyticData> {
    let nu = DifferentiableMap::new(GaussMap { f: f.clone() });
    let a = DifferentiableMap::new(DotProduct { left: f.clone(), right: nu.clone() });
    AnalyticData::new(nu, a, domain)
}

/// Fraction of grid nodes where f has full rank.
pub fn regular_fraction(f: &DifferentiableMap, grid: &Grid, rank_eps: f64) -> f64 {
    let good = (0..grid.len())
        .into_par_iter()
        .filter(|&k| classify(f, &grid.point_flat(k), rank_eps).is_ok_and(|r| r.is_regular()))
        .count();
    good as f64 / grid.len() as f64
}

/// Draws base constants until every listed stage of the perturbed map is
/// regular on more than [`MIN_REGULAR_FRACTION`] of the grid.
pub fn choose_perturbation(
    f: &DifferentiableMap,
    mode: ScheduleMode,
    x0: &[f64],
    grid: &Grid,
    stages: &[u32],
    seed: u64,
    max_draws: usize,
) -> Result<PerturbationSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_draws {
        let spec = PerturbationSpec::random(f.dim_in(), mode, x0, &mut rng)?;
        let mut ok = true;
        for &l in stages {
            if regular_fraction(&spec.stage_map(f, l)?, grid, DEFAULT_RANK_EPS) <= MIN_REGULAR_FRACTION {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(spec);
        }
    }
    Err(Error::Invalid(format!("no admissible perturbation in {max_draws} draws")))
}

/// Inner approach points x_j = x + 2^{-j} d for j = first..=last along the
/// probe directions of the extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSchedule {
    pub first: u32,
    pub last: u32,
}

impl Default for InnerSchedule {
    fn default() -> Self {
        InnerSchedule { first: 4, last: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub recovery: RecoveryOptions,
    pub inner: InnerSchedule,
    /// Stage values are extrapolated in t = ℓ^{-power}.
    pub power: u32,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { recovery: RecoveryOptions::default(), inner: InnerSchedule::default(), power: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageValue {
    pub stage: u32,
    pub value: Vec<f64>,
    /// Extrapolation error of the inner limit; zero when x is regular for the stage.
    pub inner_error: f64,
    pub status: NodeStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecovery {
    pub stages: Vec<StageValue>,
    pub failed: Vec<u32>,
    pub value: Vec<f64>,
    pub error: f64,
}

/// Inner limit at one stage: the direct value where x is regular, otherwise
/// the extrapolated limit of recoveries at x_j → x.
pub fn stage_limit(data: &AnalyticData, stage: u32, x: &[f64], opts: &LimitOptions) -> Result<StageValue> {
    if opts.inner.last < opts.inner.first + 2 {
        return Err(Error::Invalid("inner schedule needs at least three levels".into()));
    }
    let mut ro = opts.recovery.clone();
    ro.extension.h0 = Some(0.5f64.powi(opts.inner.first as i32));
    ro.extension.levels = (opts.inner.last - opts.inner.first + 1) as usize;
    let r = AnalyticRecoverer::new(data, &ro)?.recover(x);
    if !r.status.is_resolved() || r.f.iter().any(|v| !v.is_finite()) {
        return Err(Error::StageFailed(stage));
    }
    Ok(StageValue { stage, value: r.f, inner_error: r.extrapolation_error.unwrap_or(0.0), status: r.status })
}

/// Double limit: inner limits per stage (in parallel), then extrapolation of
/// the stage values to ℓ → ∞.
pub fn limit_recover<F>(family: F, stages: &[u32], x: &[f64], opts: &LimitOptions) -> Result<SequenceRecovery>
where
    F: Fn(u32) -> Result<AnalyticData> + Sync,
{
    let results: Vec<(u32, Result<StageValue>)> =
        stages.par_iter().map(|&l| (l, family(l).and_then(|d| stage_limit(&d, l, x, opts)))).collect();
    let mut done = Vec::new();
    let mut failed = Vec::new();
    for (l, r) in results {
        match r {
            Ok(v) => done.push(v),
            Err(_) => failed.push(l),
        }
    }
    if done.len() < 3 {
        return Err(Error::StageFailed(failed.first().copied().unwrap_or(0)));
    }
    let samples: Vec<(f64, Vec<f64>)> =
        done.iter().map(|s| ((s.stage as f64).powi(-(opts.power as i32)), s.value.clone())).collect();
    let ext = neville(&samples, 1)?;
    Ok(SequenceRecovery { stages: done, failed, value: ext.value, error: ext.error })
}
