//! Sampling, file round trips, grid recovery, perturbations and meshes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frontal::dual::Real;
use frontal::gallery::{self, CONSTANT_X0};
use frontal::grid::{jacobian_fd, Grid, GridField};
use frontal::io::{read_json, write_json, DataFile, ResultFile};
use frontal::map::{jacobian_exact, DifferentiableMap, Formula};
use frontal::mesh::Mesh;
use frontal::perturbation::{
    choose_perturbation, legendre_data_of_map, linear_perturb, make_schedule, quadratic_perturb, regular_fraction,
    PerturbationSpec, ScheduleMode,
};
use frontal::recovery::{recover_grid, BoxDomain, LegendreData, NodeStatus, RecoveryOptions, SampledData};
use frontal::singularities::{classify, DEFAULT_RANK_EPS};

fn interior_regular(map: &frontal::recovery::RecoveredMap, k: usize) -> bool {
    map.nodes[k].status == NodeStatus::Regular && map.grid.is_interior(&map.grid.multi_index(k))
}

/// sin(p·x) + q·x³ in two variables.
struct Smooth {
    p: [f64; 2],
    q: [f64; 2],
}

impl Formula for Smooth {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        let lin = x[0] * self.p[0] + x[1] * self.p[1];
        Ok(vec![lin.sin() + x[0] * x[0] * x[0] * self.q[0] + x[1] * x[1] * x[1] * self.q[1]])
    }
}

#[test]
fn fd_gradient_order_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let f = DifferentiableMap::new(Smooth {
            p: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            q: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
        });
        let mut errs = Vec::new();
        for count in [41usize, 81, 161] {
            let grid = Grid::cube(2, -1.0, 1.0, count).unwrap();
            let field = GridField::sample(grid.clone(), 1, |x| f.eval(x).ok()).unwrap();
            let mut worst = 0.0f64;
            for k in 0..grid.len() {
                let idx = grid.multi_index(k);
                if grid.is_interior(&idx) {
                    let d = jacobian_fd(&field, &idx).unwrap() - jacobian_exact(&f, &grid.point(&idx)).unwrap();
                    worst = worst.max(d.amax());
                }
            }
            errs.push(worst);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }
}

#[test]
fn sample_crosscap_masks_origin() {
    let e = gallery::lookup("crosscap").unwrap();
    let grid = Grid::parse("-1:1:21,-1:1:21").unwrap();
    let s = SampledData::from_analytic(&e.legendre_data(None).unwrap(), &grid).unwrap();
    assert_eq!(grid.len(), 441);
    let origin = grid.flat_index(&[10, 10]);
    assert!(!s.mask[origin]);
    assert_eq!(s.mask.iter().filter(|m| !**m).count(), 1);
}

#[test]
fn sample_cuspidal_edge_stage_heights() {
    let e = gallery::lookup("cuspidal_edge").unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 11).unwrap();
    let s = SampledData::from_analytic(&e.legendre_data(Some(4)).unwrap(), &grid).unwrap();
    for k in [0usize, 17, 62, 99, 120] {
        let x = grid.point_flat(k);
        let (u, v, n) = (x[0], x[1], 4.0);
        let want = v * (3.0 * u * u - n * v * v) / (9.0 * n * n * v * v + 4.0 * n * n + 36.0 * u * u * v * v).sqrt();
        assert!(s.mask[k]);
        assert!((s.a.at_flat(k)[0] - want).abs() < 1e-15);
    }
}

#[test]
fn sample_constant_all_regular() {
    let e = gallery::lookup("constant").unwrap();
    let grid = Grid::cube(2, -2.0, 2.0, 31).unwrap();
    let s = SampledData::from_analytic(&e.legendre_data(Some(10)).unwrap(), &grid).unwrap();
    assert!(s.mask.iter().all(|m| *m));
}

#[test]
fn exact_recovery_of_cuspidal_crosscap() {
    let e = gallery::lookup("cuspidal_crosscap").unwrap();
    let grid = Grid::cube(2, -2.0, 2.0, 101).unwrap();
    let data = LegendreData::Analytic(e.legendre_data(None).unwrap());
    let r = recover_grid(&data, &grid, &RecoveryOptions::default()).unwrap();
    let f = e.f();
    let stats = r.error_against(|x| f.eval(x).ok(), |k, _| e.regular_set_predicate(&grid.point_flat(k)));
    assert!(stats.count > 9000);
    assert!(stats.max < 1e-8, "{}", stats.max);
}

#[test]
fn constant_stage_grid_is_sphere() {
    let e = gallery::lookup("constant").unwrap();
    let grid = Grid::cube(2, -2.0, 2.0, 41).unwrap();
    for k in [1u32, 3, 10] {
        let d = e.legendre_data(Some(k)).unwrap();
        let r = recover_grid(&LegendreData::Analytic(d.clone()), &grid, &RecoveryOptions::default()).unwrap();
        let stats = r.error_against(
            |x| {
                let nu = d.nu.eval(x).ok()?;
                Some((0..3).map(|i| CONSTANT_X0[i] + nu[i] / k as f64).collect())
            },
            |_, _| true,
        );
        assert_eq!(stats.count, grid.len());
        assert!(stats.max < 1e-10);
    }
}

#[test]
fn sampled_file_round_trip_recovers_cuspidal_crosscap() {
    let e = gallery::lookup("cuspidal_crosscap").unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 101).unwrap();
    let s = SampledData::from_analytic(&e.legendre_data(None).unwrap(), &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ccc.json");
    write_json(&path, &DataFile::from_sampled(&s, Some("cuspidal_crosscap".into()))).unwrap();
    let back: DataFile = read_json(&path).unwrap();
    let s2 = back.to_sampled().unwrap();
    assert_eq!(s2.mask, s.mask);
    let r = recover_grid(&LegendreData::Sampled(s2), &grid, &RecoveryOptions::default()).unwrap();
    let f = e.f();
    let stats = r.error_against(|x| f.eval(x).ok(), |k, _| interior_regular(&r, k));
    // C·h² with C ≤ 10³
    assert!(stats.max <= 1e3 * 0.02f64.powi(2), "{}", stats.max);

    let out = dir.path().join("result.json");
    write_json(&out, &ResultFile::from_recovered(&r, None)).unwrap();
    let rf: ResultFile = read_json(&out).unwrap();
    assert_eq!(rf.status.len(), grid.len());
    let k = grid.flat_index(&[70, 30]);
    assert_eq!(rf.f_at(k).unwrap(), r.f_at(k));
}

#[test]
fn sampled_crosscap_recovery_budget() {
    // h = 0.02 on [−1,1]²
    let e = gallery::lookup("crosscap").unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 101).unwrap();
    let s = SampledData::from_analytic(&e.legendre_data(None).unwrap(), &grid).unwrap();
    let r = recover_grid(&LegendreData::Sampled(s), &grid, &RecoveryOptions::default()).unwrap();
    let f = e.f();
    let stats = r.error_against(|x| f.eval(x).ok(), |k, _| interior_regular(&r, k));
    assert!(stats.max < 1e-4, "max {:e} over {} nodes", stats.max, stats.count);
}

#[test]
fn mesh_counts_vertices() {
    let e = gallery::lookup("cuspidal_edge").unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 21).unwrap();
    let mask: Vec<bool> = grid.points().iter().map(|x| e.regular_set_predicate(x)).collect();
    let masked = mask.iter().filter(|m| !**m).count();
    assert_eq!(masked, 21);
    let f = e.f();
    let mesh = Mesh::from_grid(&grid, |k| {
        mask[k].then(|| {
            let v = f.eval(&grid.point_flat(k)).unwrap();
            [v[0], v[1], v[2]]
        })
    })
    .unwrap();
    assert_eq!(mesh.vertices.len(), grid.len() - masked);
    let obj = mesh.to_obj();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), grid.len() - masked);
}

#[test]
fn mesh_of_recovered_crosscap() {
    let e = gallery::lookup("crosscap").unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 41).unwrap();
    let data = LegendreData::Analytic(e.legendre_data(None).unwrap());
    let r = recover_grid(&data, &grid, &RecoveryOptions::default()).unwrap();
    let mesh = Mesh::from_grid(&grid, |k| {
        r.nodes[k].status.is_resolved().then(|| {
            let v = r.f_at(k);
            [v[0], v[1], v[2]]
        })
    })
    .unwrap();
    let f = e.f();
    let mut i = 0;
    for k in 0..grid.len() {
        if r.nodes[k].status.is_resolved() {
            let want = f.eval(&grid.point_flat(k)).unwrap();
            for c in 0..3 {
                assert!((mesh.vertices[i][c] - want[c]).abs() < 1e-4);
            }
            i += 1;
        }
    }
    assert_eq!(i, mesh.vertices.len());
}

struct ConstantMap;

impl Formula for ConstantMap {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        3
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        Ok(CONSTANT_X0.iter().map(|c| x[0] * 0.0 + *c).collect())
    }
}

struct CubicLine;

impl Formula for CubicLine {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        2
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        Ok(vec![x[0], x[0] * x[0] * x[0]])
    }
}

#[test]
fn linear_perturbation_of_constant_map_is_regular() {
    let f = DifferentiableMap::new(ConstantMap);
    let c = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
    let g = linear_perturb(&f, &c).unwrap();
    let grid = Grid::cube(2, -2.0, 2.0, 21).unwrap();
    assert_eq!(regular_fraction(&g, &grid, DEFAULT_RANK_EPS), 1.0);
    let j = jacobian_exact(&g, &[0.3, -0.7]).unwrap();
    for i in 0..3 {
        for k in 0..2 {
            assert_eq!(j[(i, k)], c[i][k]);
        }
    }
    let zero = linear_perturb(&f, &[vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]]).unwrap();
    assert_eq!(zero.eval(&[0.4, 0.1]).unwrap(), f.eval(&[0.4, 0.1]).unwrap());
}

#[test]
fn linear_perturbation_regularizes_cubic_line() {
    let f = DifferentiableMap::new(CubicLine);
    // the Gauss map of g still folds at 0; only the map itself is regular
    assert!(classify(&f, &[0.0], DEFAULT_RANK_EPS).unwrap().is_regular());
    let g = linear_perturb(&f, &[vec![0.0], vec![0.25]]).unwrap();
    let grid = Grid::cube(1, -2.0, 2.0, 401).unwrap();
    assert_eq!(regular_fraction(&g, &grid, DEFAULT_RANK_EPS), 1.0);
    assert_eq!(g.eval(&[2.0]).unwrap(), vec![2.0, 8.5]);
}

struct GraphQuartic;

impl Formula for GraphQuartic {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        3
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        Ok(vec![x[0], x[1], x[0] * x[1] * x[1] + x[0].sin()])
    }
}

#[test]
fn quadratic_perturbation_adds_hessian_diagonal() {
    let f = DifferentiableMap::new(GraphQuartic);
    let (c1, c2) = (0.3, -0.8);
    let g = quadratic_perturb(&f, &[c1, c2], &[0.0, 0.0]).unwrap();
    let h = 1e-4;
    for x in [[0.2, 0.5], [-0.7, 1.1]] {
        // second differences of the added term are exact for quadratics
        let d = |p: [f64; 2]| g.eval(&p).unwrap()[2] - f.eval(&p).unwrap()[2];
        let dxx = (d([x[0] + h, x[1]]) - 2.0 * d(x) + d([x[0] - h, x[1]])) / (h * h);
        let dyy = (d([x[0], x[1] + h]) - 2.0 * d(x) + d([x[0], x[1] - h])) / (h * h);
        let dxy = (d([x[0] + h, x[1] + h]) - d([x[0] + h, x[1] - h]) - d([x[0] - h, x[1] + h])
            + d([x[0] - h, x[1] - h]))
            / (4.0 * h * h);
        assert!((dxx - c1).abs() < 1e-6 && (dyy - c2).abs() < 1e-6 && dxy.abs() < 1e-6);
    }
    let same = quadratic_perturb(&f, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(same.eval(&[0.3, 0.4]).unwrap(), f.eval(&[0.3, 0.4]).unwrap());
}

#[test]
fn schedules_converge_pointwise() {
    let f = DifferentiableMap::new(GraphQuartic);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let spec = PerturbationSpec::random(2, ScheduleMode::Quadratic, &[0.1, 0.2], &mut rng).unwrap();
    let lin = PerturbationSpec::linear(&[vec![1.0, -2.0], vec![0.5, 0.0], vec![0.0, 3.0]]).unwrap();
    for _ in 0..20 {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let want = f.eval(&x).unwrap();
        for s in [&spec, &lin] {
            let dev = |l: u32| -> f64 {
                let v = s.stage_map(&f, l).unwrap().eval(&x).unwrap();
                v.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
            };
            let (d10, d20, d1000) = (dev(10), dev(20), dev(1000));
            assert!(d1000 < 1e-5);
            if d10 > 1e-12 {
                // 1/ℓ² decay
                assert!((d10 / d20 - 4.0).abs() < 1e-6, "{}", d10 / d20);
            }
        }
    }
    let s = make_schedule(&[0.6, 0.8], ScheduleMode::Quadratic).unwrap();
    let sq: f64 = s.constants(10).iter().map(|c| c * c).sum();
    assert!(sq < 0.01);
}

#[test]
fn stage_maps_recovered_on_grids() {
    let grid2 = Grid::cube(2, -1.5, 1.5, 31).unwrap();
    let grid3 = Grid::cube(3, -1.5, 1.5, 9).unwrap();
    for e in gallery::names().into_iter().map(|n| gallery::lookup(n).unwrap()).filter(|e| e.has_family) {
        let grid = if e.n == 3 { &grid3 } else { &grid2 };
        for stage in [1u32, 2, 4, 8] {
            let data = e.legendre_data(Some(stage)).unwrap();
            let r = recover_grid(&LegendreData::Analytic(data), grid, &RecoveryOptions::default()).unwrap();
            let f = e.family(stage).unwrap();
            let stats = r.error_against(|x| f.eval(x).ok(), |_, st| st == NodeStatus::Regular);
            assert!(stats.count > grid.len() / 2, "{} stage {stage}", e.name);
            assert!(stats.max < 1e-7, "{} stage {stage}: {:e}", e.name, stats.max);
        }
    }
}

#[test]
fn perturbed_map_data_recovers_it() {
    let f = DifferentiableMap::new(CubicLine);
    let g = linear_perturb(&f, &[vec![0.0], vec![0.25]]).unwrap();
    let data = legendre_data_of_map(&g, BoxDomain::cube(1, -2.0, 2.0)).unwrap();
    let grid = Grid::cube(1, -2.0, 2.0, 41).unwrap();
    let r = recover_grid(&LegendreData::Analytic(data), &grid, &RecoveryOptions::default()).unwrap();
    let stats = r.error_against(|x| g.eval(x).ok(), |_, _| true);
    assert_eq!(stats.count, 41);
    assert!(stats.max < 1e-10);
}

#[test]
fn perturbation_choice_is_deterministic() {
    let f = DifferentiableMap::new(ConstantMap);
    let grid = Grid::cube(2, -1.0, 1.0, 11).unwrap();
    let a = choose_perturbation(&f, ScheduleMode::Linear, &[0.0, 0.0], &grid, &[1, 2, 4], 5, 20).unwrap();
    let b = choose_perturbation(&f, ScheduleMode::Linear, &[0.0, 0.0], &grid, &[1, 2, 4], 5, 20).unwrap();
    assert_eq!(a, b);
    assert!(regular_fraction(&a.stage_map(&f, 4).unwrap(), &grid, DEFAULT_RANK_EPS) > 0.99);
}
