use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use frontal::dual::{Dual, Real};
use frontal::gallery;
use frontal::grid::{jacobian_fd, Grid, GridField};
use frontal::linalg::{solve_coefficients, DEFAULT_DET_EPS};
use frontal::map::{jacobian_exact, DifferentiableMap, Formula, Rotated};
use frontal::perturbation::{make_schedule, quadratic_perturb, ScheduleMode};
use frontal::recovery::{
    random_rotation, recover_point, recover_with_rotation, AnalyticData, BoxDomain, RecoveryOptions,
};
use frontal::richardson::richardson_limit;
use frontal::singularities::{minors, phi, singular_values};
use frontal::sphere::{extract_angles, frame_unchecked, nu_sphere, DEFAULT_POLE_EPS};

fn principal_angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.5f64..1.5, n - 1), -3.1f64..3.1).prop_map(|(mut v, last)| {
        v.push(last);
        v
    })
}

/// Graph of a cubic polynomial in two variables: (x, y, g(x, y)).
struct Graph {
    c: [f64; 10],
}

impl Graph {
    fn g<T: Real>(&self, x: T, y: T) -> T {
        let m = [T::one(), x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
        let mut s = T::zero();
        for (mi, ci) in m.iter().zip(&self.c) {
            s += *mi * *ci;
        }
        s
    }
}

impl Formula for Graph {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        3
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        Ok(vec![x[0], x[1], self.g(x[0], x[1])])
    }
}

/// ν = (−g_x, −g_y, 1)/√(1 + |∇g|²), written out from the polynomial coefficients.
struct GraphNormal {
    c: [f64; 10],
}

impl Formula for GraphNormal {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        3
    }
    fn apply<T: Real>(&self, p: &[T]) -> frontal::Result<Vec<T>> {
        let (x, y, c) = (p[0], p[1], &self.c);
        let gx = x * (2.0 * c[3]) + y * c[4] + x * x * (3.0 * c[6]) + x * y * (2.0 * c[7]) + y * y * c[8] + c[1];
        let gy = x * c[4] + y * (2.0 * c[5]) + x * x * c[7] + x * y * (2.0 * c[8]) + y * y * (3.0 * c[9]) + c[2];
        let r = (gx * gx + gy * gy + 1.0).sqrt();
        Ok(vec![-gx / r, -gy / r, r.recip()])
    }
}

struct GraphHeight {
    f: DifferentiableMap,
    nu: DifferentiableMap,
}

impl Formula for GraphHeight {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, x: &[T]) -> frontal::Result<Vec<T>> {
        let f = self.f.eval_at(x)?;
        let nu = self.nu.eval_at(x)?;
        let mut s = T::zero();
        for (a, b) in f.iter().zip(&nu) {
            s += *a * *b;
        }
        Ok(vec![s])
    }
}

fn graph_data(c: [f64; 10]) -> (DifferentiableMap, AnalyticData) {
    let f = DifferentiableMap::new(Graph { c });
    let nu = DifferentiableMap::new(GraphNormal { c });
    let a = DifferentiableMap::new(GraphHeight { f: f.clone(), nu: nu.clone() });
    (f, AnalyticData::new(nu, a, BoxDomain::cube(2, -1.0, 1.0)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frame_is_orthonormal(theta in (1usize..=4).prop_flat_map(principal_angles)) {
        let n = theta.len();
        let fr = frame_unchecked(&theta);
        let mut basis = vec![fr.nu.clone()];
        basis.extend(fr.mu_hat.iter().cloned());
        for i in 0..=n {
            for j in 0..=n {
                let d: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                let want = f64::from(u8::from(i == j));
                prop_assert!((d - want).abs() < 1e-12, "<{}, {}> = {}", i, j, d);
            }
        }
    }

    #[test]
    fn angles_round_trip(theta in principal_angles(3)) {
        let v = nu_sphere(&theta);
        let back = extract_angles(&v, DEFAULT_POLE_EPS).unwrap();
        for (a, b) in back.iter().zip(&theta) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mu_tilde_is_angle_derivative(theta in principal_angles(3)) {
        // μ̃ⱼ = ρⱼ μ̂ⱼ
        let fr = frame_unchecked(&theta);
        let nu = nu_sphere(&Dual::seed(&theta));
        for j in 0..3 {
            for k in 0..4 {
                prop_assert!((nu[k].deriv(j) - fr.rho[j] * fr.mu_hat[j][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_chain_rule(c in prop::array::uniform10(-1.0f64..1.0), x in -0.9f64..0.9, y in -0.9f64..0.9, seed in any::<u64>()) {
        let f = DifferentiableMap::new(Graph { c });
        let r = random_rotation(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let rf = DifferentiableMap::new(Rotated { map: f.clone(), r: r.clone() });
        let j = jacobian_exact(&f, &[x, y]).unwrap();
        let rj = jacobian_exact(&rf, &[x, y]).unwrap();
        let rm = DMatrix::from_fn(3, 3, |i, k| r[i][k]);
        prop_assert!((rm * j - rj).amax() < 1e-12);
    }

    #[test]
    fn graphs_are_recovered(c in prop::array::uniform10(-1.0f64..1.0), x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let (f, data) = graph_data(c);
        match recover_point(&data, &[x, y], &RecoveryOptions::default()) {
            Ok(r) => {
                let want = f.eval(&[x, y]).unwrap();
                for (p, q) in r.f.iter().zip(&want) {
                    prop_assert!((p - q).abs() < 1e-6 * (1.0 + q.abs()));
                }
            }
            // a flat Gauss map leaves nothing to recover from
            Err(e) => prop_assert!(matches!(e, frontal::Error::Unresolved)),
        }
    }

    #[test]
    fn rotation_equivariance(x in -1.9f64..1.9, y in 0.05f64..1.9, seed in any::<u64>()) {
        let data = gallery::lookup("crosscap").unwrap().legendre_data(None).unwrap();
        let opts = RecoveryOptions::default();
        let r = random_rotation(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let base = recover_point(&data, &[x, y], &opts).unwrap().f;
        let rot = recover_with_rotation(&data, &[x, y], &r, &opts).unwrap();
        for (p, q) in base.iter().zip(&rot) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn solver_matches_least_squares(m in prop::collection::vec(-1.0f64..1.0, 9), rhs in prop::collection::vec(-1.0f64..1.0, 3)) {
        let a = DMatrix::from_row_slice(3, 3, &m);
        prop_assume!(a.determinant().abs() > 1e-3);
        let rows: Vec<Vec<f64>> = (0..3).map(|i| m[3 * i..3 * i + 3].to_vec()).collect();
        let b = solve_coefficients(&rhs, &rows, DEFAULT_DET_EPS).unwrap();
        let svd = a.clone().svd(true, true);
        let ls = svd.solve(&nalgebra::DVector::from_vec(rhs.clone()), 1e-14).unwrap();
        for (p, q) in b.iter().zip(ls.iter()) {
            prop_assert!((p - q).abs() < 1e-8 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn phi_is_product_of_squared_singular_values(m in prop::collection::vec(-2.0f64..2.0, 12)) {
        let j = DMatrix::from_row_slice(4, 3, &m);
        let p = phi(&j).unwrap();
        let s: f64 = singular_values(&j).iter().map(|v| v * v).product();
        prop_assert!((p - s).abs() < 1e-10 * (1.0 + s));
        prop_assert_eq!(minors(&j).unwrap().len(), 4);
    }

    #[test]
    fn schedule_bound_holds(base in prop::collection::vec(-10.0f64..10.0, 1..8), stage in 1u32..1000) {
        prop_assume!(base.iter().any(|c| *c != 0.0));
        let s = make_schedule(&base, ScheduleMode::Linear).unwrap();
        prop_assert!(s.satisfies_bound(stage));
        let n1: f64 = s.constants(stage).iter().map(|v| v * v).sum();
        let n2: f64 = s.constants(stage + 1).iter().map(|v| v * v).sum();
        prop_assert!(n2 < n1);
    }

    #[test]
    fn quadratic_perturbation_keeps_leading_components(c in prop::array::uniform10(-1.0f64..1.0), q in prop::collection::vec(-1.0f64..1.0, 2), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = DifferentiableMap::new(Graph { c });
        let g = quadratic_perturb(&f, &q, &[0.2, -0.1]).unwrap();
        let (a, b) = (f.eval(&[x, y]).unwrap(), g.eval(&[x, y]).unwrap());
        prop_assert_eq!(a[0], b[0]);
        prop_assert_eq!(a[1], b[1]);
        let extra = 0.5 * (q[0] * (x - 0.2).powi(2) + q[1] * (y + 0.1).powi(2));
        prop_assert!((b[2] - a[2] - extra).abs() < 1e-12);
    }

    #[test]
    fn richardson_exact_on_polynomials(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0) {
        let samples: Vec<(f64, Vec<f64>)> = (0..4)
            .map(|k| {
                let t = 0.1 / 2f64.powi(k);
                (t, vec![c0 + c1 * t + c2 * t * t])
            })
            .collect();
        let e = richardson_limit(&samples, 1).unwrap();
        prop_assert!((e.value[0] - c0).abs() < 1e-11);
    }
}

#[test]
fn fd_gradient_second_order() {
    // a(x, y) of the cuspidal cross-cap on shrinking grids, compared with duals
    let e = gallery::lookup("cuspidal_crosscap").unwrap();
    let a = e.a_closed(None).unwrap();
    let mut errs = Vec::new();
    for count in [41usize, 81, 161] {
        let grid = Grid::cube(2, -1.0, 1.0, count).unwrap();
        let field = GridField::sample(grid.clone(), 1, |x| a.eval(x).ok()).unwrap();
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let idx = grid.multi_index(k);
            if !grid.is_interior(&idx) {
                continue;
            }
            let x = grid.point(&idx);
            let fd = jacobian_fd(&field, &idx).unwrap();
            let ex = jacobian_exact(&a, &x).unwrap();
            worst = worst.max((fd - ex).amax());
        }
        errs.push(worst);
    }
    assert!(errs[2] < 1e-3);
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
    }
}

#[test]
fn fd_gradient_at_hundredth_spacing() {
    let e = gallery::lookup("cuspidal_crosscap").unwrap();
    let a = e.a_closed(None).unwrap();
    let grid = Grid::cube(2, -1.0, 1.0, 201).unwrap();
    let field = GridField::sample(grid.clone(), 1, |x| a.eval(x).ok()).unwrap();
    let mut worst = (0.0f64, Vec::new());
    for k in 0..grid.len() {
        let idx = grid.multi_index(k);
        let x = grid.point(&idx);
        if !grid.is_interior(&idx) || !e.regular_set_predicate(&x) {
            continue;
        }
        let d = (jacobian_fd(&field, &idx).unwrap() - jacobian_exact(&a, &x).unwrap()).amax();
        if d > worst.0 {
            worst = (d, x);
        }
    }
    assert!(worst.0 < 1e-4, "max {:e} at {:?}", worst.0, worst.1);
}

#[test]
fn frame_laws_at_extreme_angles() {
    let theta = [PI / 2.0 - 1e-9, -PI / 2.0 + 1e-9, PI];
    let fr = frame_unchecked(&theta);
    for (j, m) in fr.mu_hat.iter().enumerate() {
        let norm: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12, "mu_hat[{j}]");
    }
}
