use std::fmt::Display;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use frontal::gallery::{self, GalleryEntry};
use frontal::grid::Grid;
use frontal::perturbation::ScheduleMode;
use frontal::recovery::RecoveryOptions;

use crate::exit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Dual-number derivatives of the closed forms.
    Exact,
    /// Finite differences on sampled data.
    Fd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Linear,
    Quadratic,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Gallery example name.
    #[arg(long, conflicts_with = "input")]
    pub example: Option<String>,
    /// Data or result file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Stage of the example's family.
    #[arg(long)]
    pub stage: Option<u32>,
    /// "min:max:count[,min:max:count...]"; one axis spec is repeated for every dimension.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// "x1,x2[,x3]"
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub det_eps: Option<f64>,
    #[arg(long)]
    pub pole_eps: Option<f64>,
    /// Perturbation kind for `perturb`.
    #[arg(long, value_enum, default_value = "linear")]
    pub mode: Mode,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub fn bad_config(e: impl Display) -> Failure {
    Failure { code: exit::BAD_CONFIG, message: e.to_string() }
}

pub fn failed(e: impl Display) -> Failure {
    Failure { code: exit::FAILED, message: e.to_string() }
}

pub type Outcome = Result<u8, Failure>;

pub enum Source {
    Example { entry: GalleryEntry, stage: Option<u32> },
    File(PathBuf),
}

pub struct RunConfig {
    pub source: Source,
    pub grid: Option<String>,
    pub backend: Option<Backend>,
    pub point: Option<Vec<f64>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub mode: ScheduleMode,
    pub opts: RecoveryOptions,
}

/// "name" or "name:stage", as stored in data files.
pub fn source_tag(entry: &GalleryEntry, stage: Option<u32>) -> String {
    match stage {
        Some(k) => format!("{}:{k}", entry.name),
        None => entry.name.to_string(),
    }
}

pub fn parse_source_tag(tag: &str) -> Option<(GalleryEntry, Option<u32>)> {
    let (name, stage) = match tag.split_once(':') {
        Some((n, s)) => (n, Some(s.parse().ok()?)),
        None => (tag, None),
    };
    Some((gallery::lookup(name).ok()?, stage))
}

fn parse_point(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad_config(format!("bad coordinate '{p}' in --point"))))
        .collect()
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, Failure> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(bad_config(format!("--{name} must be positive"))),
        _ => Ok(v),
    }
}

impl RunArgs {
    pub fn resolve(self) -> Result<RunConfig, Failure> {
        let source = match (self.example, self.input) {
            (Some(name), None) => {
                let entry = gallery::lookup(&name).map_err(bad_config)?;
                match (entry.has_family, self.stage) {
                    (false, Some(_)) => return Err(bad_config(format!("example '{name}' has no stage family"))),
                    (_, Some(0)) => return Err(bad_config("stages start at 1")),
                    _ => {}
                }
                Source::Example { entry, stage: self.stage }
            }
            (None, Some(path)) => {
                if self.stage.is_some() {
                    return Err(bad_config("--stage applies to --example only"));
                }
                Source::File(path)
            }
            (None, None) => return Err(bad_config("one of --example or --input is required")),
            (Some(_), Some(_)) => unreachable!("clap rejects both"),
        };
        let mut opts = RecoveryOptions { seed: self.seed, ..RecoveryOptions::default() };
        if let Some(v) = positive("det-eps", self.det_eps)? {
            opts.det_eps = v;
        }
        if let Some(v) = positive("pole-eps", self.pole_eps)? {
            opts.pole_eps = v;
        }
        Ok(RunConfig {
            source,
            grid: self.grid,
            backend: self.backend,
            point: self.point.as_deref().map(parse_point).transpose()?,
            seed: self.seed,
            out: self.out,
            mode: match self.mode {
                Mode::Linear => ScheduleMode::Linear,
                Mode::Quadratic => ScheduleMode::Quadratic,
            },
            opts,
        })
    }
}

impl RunConfig {
    pub fn example(&self, command: &str) -> Result<(&GalleryEntry, Option<u32>), Failure> {
        match &self.source {
            Source::Example { entry, stage } => Ok((entry, *stage)),
            Source::File(_) => Err(bad_config(format!("{command} needs --example"))),
        }
    }

    /// Grid from --grid, or the example's default domain.
    pub fn grid_for(&self, entry: &GalleryEntry) -> Result<Grid, Failure> {
        let n = entry.n;
        let grid = match &self.grid {
            Some(spec) => {
                let g = Grid::parse(spec).map_err(bad_config)?;
                if g.dim() == 1 && n > 1 {
                    Grid::new(vec![g.axes[0].clone(); n]).map_err(bad_config)?
                } else {
                    g
                }
            }
            None => {
                let count = if n >= 3 { 13 } else { 41 };
                Grid::cube(n, entry.domain.lo[0], entry.domain.hi[0], count).map_err(bad_config)?
            }
        };
        if grid.dim() != n {
            return Err(bad_config(format!("grid has {} axes, example '{}' needs {n}", grid.dim(), entry.name)));
        }
        Ok(grid)
    }

    pub fn point_for(&self, n: usize) -> Result<Vec<f64>, Failure> {
        let p = self.point.clone().ok_or_else(|| bad_config("--point is required"))?;
        if p.len() != n {
            return Err(bad_config(format!("--point has {} coordinates, expected {n}", p.len())));
        }
        Ok(p)
    }

    pub fn out(&self, command: &str) -> Result<&PathBuf, Failure> {
        self.out.as_ref().ok_or_else(|| bad_config(format!("{command} needs --out")))
    }
}
