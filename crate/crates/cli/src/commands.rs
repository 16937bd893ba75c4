use std::fs;

use frontal::gallery::GalleryEntry;
use frontal::grid::Grid;
use frontal::io::{read_json, write_json, DataFile, ResultFile};
use frontal::map::DifferentiableMap;
use frontal::mesh::Mesh;
use frontal::perturbation::{
    choose_perturbation, legendre_data_of_map, limit_recover, regular_fraction, LimitOptions, ScheduleMode,
};
use frontal::recovery::{recover_grid, BoxDomain, LegendreData, NodeStatus, RecoveredMap, ResidualStats, SampledData};
use frontal::singularities::DEFAULT_RANK_EPS;

use crate::config::{bad_config, failed, parse_source_tag, source_tag, Backend, Outcome, RunConfig, Source};
use crate::exit;
use crate::report::{join, sci, Report};

const LIMIT_STAGES: [u32; 5] = [1, 2, 4, 8, 16];
const MAX_DRAWS: usize = 50;
const EXACT_TOLERANCE: f64 = 1e-8;
const FD_CONSTANT: f64 = 1e3;

pub fn sample(cfg: &RunConfig) -> Outcome {
    let (entry, stage) = cfg.example("sample")?;
    let out = cfg.out("sample")?;
    let grid = cfg.grid_for(entry)?;
    let data = entry.legendre_data(stage).map_err(bad_config)?;
    let s = SampledData::from_analytic(&data, &grid).map_err(failed)?;
    write_json(out, &DataFile::from_sampled(&s, Some(source_tag(entry, stage)))).map_err(failed)?;
    let masked = s.mask.iter().filter(|m| !**m).count();
    let mut r = Report::new();
    r.kv("example", entry.name).kv("n", entry.n).kv("nodes", grid.len()).kv("masked", masked).kv("out", out.display());
    if let Some(k) = stage {
        r.kv("stage", k);
    }
    r.header(&["axis", "min", "max", "count"]);
    for (i, ax) in grid.axes.iter().enumerate() {
        r.row(vec![i.to_string(), ax[0].to_string(), ax[ax.len() - 1].to_string(), ax.len().to_string()]);
    }
    r.print();
    Ok(exit::OK)
}

struct Recovery {
    map: RecoveredMap,
    truth: Option<(GalleryEntry, Option<u32>)>,
    backend: Backend,
    source: String,
}

fn run_recovery(cfg: &RunConfig) -> Result<Recovery, crate::config::Failure> {
    match &cfg.source {
        Source::Example { entry, stage } => {
            let backend = cfg.backend.unwrap_or(Backend::Exact);
            let grid = cfg.grid_for(entry)?;
            let analytic = entry.legendre_data(*stage).map_err(bad_config)?;
            let data = match backend {
                Backend::Exact => LegendreData::Analytic(analytic),
                Backend::Fd => LegendreData::Sampled(SampledData::from_analytic(&analytic, &grid).map_err(failed)?),
            };
            let map = recover_grid(&data, &grid, &cfg.opts).map_err(failed)?;
            Ok(Recovery { map, truth: Some((entry.clone(), *stage)), backend, source: source_tag(entry, *stage) })
        }
        Source::File(path) => {
            if cfg.backend == Some(Backend::Exact) {
                return Err(bad_config("sampled input needs --backend fd"));
            }
            if cfg.grid.is_some() {
                return Err(bad_config("the grid of a sampled input comes from the file"));
            }
            let file: DataFile = read_json(path).map_err(bad_config)?;
            let data = file.to_sampled().map_err(bad_config)?;
            let grid = data.grid().clone();
            let map = recover_grid(&LegendreData::Sampled(data), &grid, &cfg.opts).map_err(failed)?;
            let truth = file.source.as_deref().and_then(parse_source_tag);
            let source = file.source.unwrap_or_else(|| path.display().to_string());
            Ok(Recovery { map, truth, backend: Backend::Fd, source })
        }
    }
}

fn truth_map(entry: &GalleryEntry, stage: Option<u32>) -> Option<DifferentiableMap> {
    entry.stage_map(stage).ok()
}

/// (error over resolved nodes off the singular tube, error at interior regular nodes)
fn errors(rec: &Recovery) -> Option<(ResidualStats, ResidualStats)> {
    let (entry, stage) = rec.truth.as_ref()?;
    let f = truth_map(entry, *stage)?;
    let m = &rec.map;
    let all = m.error_against(|x| f.eval(x).ok(), |k, _| entry.regular_set_predicate(&m.grid.point_flat(k)));
    let interior = m.error_against(
        |x| f.eval(x).ok(),
        |k, st| st == NodeStatus::Regular && m.grid.is_interior(&m.grid.multi_index(k)),
    );
    Some((all, interior))
}

fn status_code(m: &RecoveredMap) -> u8 {
    let s = &m.summary;
    if s.regular + s.extended == 0 {
        exit::FAILED
    } else if s.unresolved > 0 {
        exit::PARTIAL
    } else {
        exit::OK
    }
}

fn summary_report(rec: &Recovery) -> Report {
    let s = &rec.map.summary;
    let mut r = Report::new();
    r.kv("source", &rec.source)
        .kv("backend", if rec.backend == Backend::Exact { "exact" } else { "fd" })
        .kv("nodes", rec.map.grid.len())
        .kv("regular", s.regular)
        .kv("extended", s.extended)
        .kv("unresolved", s.unresolved)
        .kv("masked", s.masked)
        .kv("tangency_max", sci(s.tangency.max))
        .kv("height_max", sci(s.height.max));
    if let Some((all, interior)) = errors(rec) {
        r.kv("max_error", sci(all.max))
            .kv("rms_error", sci(all.rms))
            .kv("max_error_interior_regular", sci(interior.max));
    }
    r.header(&["status", "nodes"]);
    for (name, count) in
        [("regular", s.regular), ("extended_by_limit", s.extended), ("unresolved", s.unresolved), ("masked", s.masked)]
    {
        r.row(vec![name.into(), count.to_string()]);
    }
    r
}

pub fn recover(cfg: &RunConfig) -> Outcome {
    let rec = run_recovery(cfg)?;
    let mut r = summary_report(&rec);
    if let Some(out) = &cfg.out {
        write_json(out, &ResultFile::from_recovered(&rec.map, Some(rec.source.clone()))).map_err(failed)?;
        r.kv("out", out.display());
    }
    r.print();
    let code = status_code(&rec.map);
    if code == exit::FAILED {
        return Err(failed("no node could be recovered"));
    }
    Ok(code)
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let rec = run_recovery(cfg)?;
    let Some((all, interior)) = errors(&rec) else {
        return Err(bad_config("no closed form to verify against"));
    };
    let (measured, tolerance) = match rec.backend {
        Backend::Exact => (all.max, EXACT_TOLERANCE),
        Backend::Fd => {
            let h = rec.map.grid.axes.iter().flat_map(|a| a.windows(2).map(|w| w[1] - w[0])).fold(0.0, f64::max);
            (interior.max, FD_CONSTANT * h * h)
        }
    };
    let mut r = summary_report(&rec);
    let (entry, stage) = rec.truth.as_ref().expect("errors() needs a truth");
    if rec.backend == Backend::Exact && entry.example.has_stated_b() {
        if let Ok(b) = entry.b_principal(*stage) {
            let m = &rec.map;
            let worst = (0..m.grid.len())
                .filter(|&k| m.nodes[k].status == NodeStatus::Regular)
                .filter_map(|k| {
                    let want = b.eval(&m.grid.point_flat(k)).ok()?;
                    Some(want.iter().zip(m.b_at(k)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
                })
                .fold(0.0, f64::max);
            r.kv("max_b_error", sci(worst));
        }
    }
    let pass = measured.is_finite() && measured <= tolerance && all.count > 0;
    r.kv("tolerance", sci(tolerance)).kv("pass", pass);
    r.print();
    Ok(if pass { exit::OK } else { exit::FAILED })
}

pub fn limit(cfg: &RunConfig) -> Outcome {
    let (entry, _) = cfg.example("limit")?;
    if !entry.has_family {
        return Err(bad_config(format!("example '{}' has no stage family", entry.name)));
    }
    let x = cfg.point_for(entry.n)?;
    // stage maps of the gallery families are affine in 1/ℓ
    let opts = LimitOptions { recovery: cfg.opts.clone(), power: 1, ..LimitOptions::default() };
    let target = entry.f().eval(&x).map_err(bad_config)?;
    let mut r = Report::new();
    r.kv("example", entry.name).kv("point", join(&x)).kv("target", join(&target));
    match limit_recover(|l| entry.legendre_data(Some(l)), &LIMIT_STAGES, &x, &opts) {
        Ok(s) => {
            let err = s.value.iter().zip(&target).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            r.kv("value", join(&s.value))
                .kv("error_indicator", sci(s.error))
                .kv("error", sci(err))
                .kv("failed_stages", s.failed.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
            r.header(&["stage", "status", "value", "inner_error"]);
            for st in &s.stages {
                r.row(vec![
                    st.stage.to_string(),
                    st.status.as_str().into(),
                    join(&st.value),
                    format!("{:.3e}", st.inner_error),
                ]);
            }
            for l in &s.failed {
                r.row(vec![l.to_string(), "stage_failed".into(), String::new(), String::new()]);
            }
            r.print();
            Ok(if s.failed.is_empty() { exit::OK } else { exit::PARTIAL })
        }
        Err(e) => {
            r.kv("value", "none");
            r.print();
            Err(failed(e))
        }
    }
}

pub fn perturb(cfg: &RunConfig) -> Outcome {
    let (entry, stage) = cfg.example("perturb")?;
    if stage.is_some() {
        return Err(bad_config("perturb builds its own stages; drop --stage"));
    }
    let f = entry.f();
    let grid = cfg.grid_for(entry)?;
    let x0 = cfg.point.clone().unwrap_or_else(|| vec![0.0; entry.n]);
    if x0.len() != entry.n {
        return Err(bad_config(format!("--point has {} coordinates, expected {}", x0.len(), entry.n)));
    }
    let spec = choose_perturbation(&f, cfg.mode, &x0, &grid, &LIMIT_STAGES, cfg.seed, MAX_DRAWS).map_err(failed)?;
    let mut r = Report::new();
    r.kv("example", entry.name)
        .kv("mode", if cfg.mode == ScheduleMode::Linear { "linear" } else { "quadratic" })
        .kv("seed", cfg.seed)
        .kv("base", join(&spec.schedule.base));
    r.header(&["stage", "squared_sum", "bound", "within_bound", "regular_fraction"]);
    for &l in &LIMIT_STAGES {
        let c = spec.schedule.constants(l);
        let sq: f64 = c.iter().map(|v| v * v).sum();
        let g = spec.stage_map(&f, l).map_err(failed)?;
        r.row(vec![
            l.to_string(),
            format!("{sq:.6e}"),
            format!("{:.6e}", 1.0 / f64::from(l * l)),
            spec.schedule.satisfies_bound(l).to_string(),
            format!("{:.4}", regular_fraction(&g, &grid, DEFAULT_RANK_EPS)),
        ]);
    }
    let Some(x) = cfg.point.clone() else {
        r.print();
        return Ok(exit::OK);
    };
    let domain = BoxDomain::of_grid(&grid);
    let opts = LimitOptions { recovery: cfg.opts.clone(), ..LimitOptions::default() };
    let target = f.eval(&x).map_err(bad_config)?;
    r.kv("point", join(&x)).kv("target", join(&target));
    let family = |l: u32| legendre_data_of_map(&spec.stage_map(&f, l)?, domain.clone());
    let code = match limit_recover(family, &LIMIT_STAGES, &x, &opts) {
        Ok(s) => {
            let err = s.value.iter().zip(&target).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            r.kv("value", join(&s.value)).kv("error_indicator", sci(s.error)).kv("error", sci(err));
            if s.failed.is_empty() {
                exit::OK
            } else {
                exit::PARTIAL
            }
        }
        Err(e) => {
            r.kv("value", "none").kv("limit_error", e);
            exit::PARTIAL
        }
    };
    r.print();
    Ok(code)
}

fn mesh_from_result(file: &ResultFile) -> Result<(Grid, Mesh), crate::config::Failure> {
    let grid = file.grid().map_err(bad_config)?;
    let mesh = Mesh::from_grid(&grid, |k| file.f_at(k).map(|v| [v[0], v[1], v[2]])).map_err(bad_config)?;
    Ok((grid, mesh))
}

pub fn mesh(cfg: &RunConfig) -> Outcome {
    let out = cfg.out("mesh")?;
    let (grid, mesh, source) = match &cfg.source {
        Source::Example { entry, stage } => {
            if entry.n != 2 {
                return Err(bad_config(frontal::Error::DimensionUnsupported(entry.n)));
            }
            let grid = cfg.grid_for(entry)?;
            let f = match stage {
                Some(k) => entry.family(*k).map_err(bad_config)?,
                None => entry.f(),
            };
            let mesh = Mesh::from_grid(&grid, |k| {
                let x = grid.point_flat(k);
                if !entry.regular_set_predicate(&x) {
                    return None;
                }
                f.eval(&x).ok().map(|v| [v[0], v[1], v[2]])
            })
            .map_err(bad_config)?;
            (grid, mesh, source_tag(entry, *stage))
        }
        Source::File(path) => {
            let file: ResultFile = read_json(path).map_err(bad_config)?;
            if file.n != 2 {
                return Err(bad_config(frontal::Error::DimensionUnsupported(file.n)));
            }
            let (grid, mesh) = mesh_from_result(&file)?;
            (grid, mesh, file.source.unwrap_or_else(|| path.display().to_string()))
        }
    };
    fs::write(out, mesh.to_obj()).map_err(failed)?;
    let mut r = Report::new();
    r.kv("source", source)
        .kv("vertices", mesh.vertices.len())
        .kv("faces", mesh.faces.len())
        .kv("omitted", grid.len() - mesh.vertices.len())
        .kv("out", out.display());
    r.print();
    Ok(if mesh.vertices.is_empty() { exit::FAILED } else { exit::OK })
}
