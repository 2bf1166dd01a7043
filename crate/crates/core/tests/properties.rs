use bregcut::bregman::conjugate_bregman_distance;
use bregcut::linalg::{dist2, dot, norm2, sub};
use bregcut::stepsize::{dual_derivative, solve_dual_step};
use bregcut::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        Just(Kernel::Quadratic),
        (0.0f64..3.0).prop_map(|lambda| Kernel::ElasticNet { lambda }),
    ]
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

/// Kernel plus `k` vectors of a common dimension in 1..=6.
fn kernel_and_vecs(k: usize) -> impl Strategy<Value = (Kernel, Vec<Vec<f64>>)> {
    (kernel(), 1usize..=6)
        .prop_flat_map(move |(ker, n)| (Just(ker), prop::collection::vec(vec_of(n), k)))
}

fn matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
        prop::collection::vec(-3.0f64..3.0, m * n)
            .prop_map(move |d| DenseMatrix::new(m, n, d).unwrap())
    })
}

fn objective() -> impl Strategy<Value = InnerObjective> {
    (matrix(), 0usize..3, 0.0f64..2.0)
        .prop_flat_map(|(a, kind, r)| {
            let m = a.rows();
            (Just(a), Just(kind), Just(r), vec_of(m))
        })
        .prop_filter_map("nonzero matrix", |(a, kind, r, c)| {
            if a.is_zero() {
                return None;
            }
            match kind {
                0 => InnerObjective::least_squares(a, c),
                1 => InnerObjective::dist_sq(a, ConvexSet::l2_ball(c, r).unwrap()),
                _ => InnerObjective::dist_sq(a, ConvexSet::linf_box(c, r).unwrap()),
            }
            .ok()
        })
}

fn term_scale(vs: &[&[f64]], lambda: f64) -> f64 {
    let s: f64 = vs.iter().map(|v| norm2(v)).sum();
    (1.0 + s * s) * (1.0 + lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn three_point_identity((k, v) in kernel_and_vecs(3)) {
        let r = three_point_residual(&k, &v[0], &v[1], &v[2]).unwrap();
        prop_assert!(r <= 1e-12 * term_scale(&[&v[0], &v[1], &v[2]], k.lambda()), "{r}");
    }

    #[test]
    fn distance_dominates_half_squared_norm((k, v) in kernel_and_vecs(2)) {
        let x = k.mirror_map(&v[1]);
        let d = bregman_distance(&k, &v[0], &v[1]).unwrap();
        let q = 0.5 * k.mu() * dist2(&v[0], &x).powi(2);
        prop_assert!(d >= q - 1e-12 * term_scale(&[&v[0], &v[1]], k.lambda()), "{d} < {q}");
    }

    #[test]
    fn distance_matches_explicit_form((k, v) in kernel_and_vecs(2)) {
        let x = k.mirror_map(&v[1]);
        let explicit = k.value(&v[0]) - k.value(&x) - dot(&v[1], &sub(&v[0], &x));
        let d = bregman_distance(&k, &v[0], &v[1]).unwrap();
        prop_assert!((d - explicit.max(0.0)).abs() <= 1e-12 * term_scale(&[&v[0], &v[1]], k.lambda()));
    }

    #[test]
    fn conjugate_distance_symmetry((k, v) in kernel_and_vecs(2)) {
        let (p_star, q_star) = (&v[0], &v[1]);
        let p = k.mirror_map(p_star);
        let lhs = conjugate_bregman_distance(&k, q_star, p_star).unwrap();
        let rhs = bregman_distance(&k, &p, q_star).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * term_scale(&[p_star, q_star], k.lambda()), "{lhs} vs {rhs}");
    }

    #[test]
    fn fenchel_equality((k, v) in kernel_and_vecs(1)) {
        let x = k.mirror_map(&v[0]);
        let lhs = k.value(&x) + k.conjugate_value(&v[0]);
        let rhs = dot(&x, &v[0]);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn mirror_map_is_nonexpansive((k, v) in kernel_and_vecs(2)) {
        let d = dist2(&k.mirror_map(&v[0]), &k.mirror_map(&v[1]));
        prop_assert!(d <= dist2(&v[0], &v[1]) / k.mu() * (1.0 + 1e-15) + 1e-15);
    }

    #[test]
    fn fenchel_young_inequality((k, v) in kernel_and_vecs(2)) {
        prop_assert!(k.value(&v[0]) + k.conjugate_value(&v[1]) >= dot(&v[0], &v[1]) - 1e-12 * term_scale(&[&v[0], &v[1]], k.lambda()));
    }

    #[test]
    fn zero_weight_is_quadratic(v in vec_of(4)) {
        let en = Kernel::ElasticNet { lambda: 0.0 };
        let q = Kernel::Quadratic;
        prop_assert_eq!(en.value(&v), q.value(&v));
        prop_assert_eq!(en.conjugate_value(&v), q.conjugate_value(&v));
        prop_assert_eq!(en.mirror_map(&v), q.mirror_map(&v));
    }

    #[test]
    fn cocoercive_gradients(obj in objective(), seed in any::<u64>()) {
        let mut rng = harness::SplitMix64::new(seed);
        let n = obj.dim();
        let u: Vec<f64> = (0..n).map(|_| 3.0 * rng.normal()).collect();
        let w: Vec<f64> = (0..n).map(|_| 3.0 * rng.normal()).collect();
        let dg = sub(&obj.gradient(&u).unwrap(), &obj.gradient(&w).unwrap());
        let lhs = dot(&dg, &sub(&u, &w));
        let rhs = dot(&dg, &dg) / obj.lipschitz();
        let tol = 1e-12 * (1.0 + obj.lipschitz()) * (1.0 + norm2(&u) + norm2(&w)).powi(2) * (1.0 + norm2(obj.target()));
        prop_assert!(lhs >= rhs - tol, "{lhs} < {rhs}");
        prop_assert!(norm2(&dg) <= obj.lipschitz() * dist2(&u, &w) * (1.0 + 1e-12) + tol);
    }

    #[test]
    fn projections_are_idempotent_and_nonexpansive(
        c in vec_of(4), r in 0.0f64..3.0, y in vec_of(4), z in vec_of(4), ball in any::<bool>()
    ) {
        let set = if ball { ConvexSet::l2_ball(c, r).unwrap() } else { ConvexSet::linf_box(c, r).unwrap() };
        let py = set.project(&y).unwrap();
        let pz = set.project(&z).unwrap();
        let again = set.project(&py).unwrap();
        prop_assert!(dist2(&py, &again) <= 1e-12 * (1.0 + norm2(&py)));
        prop_assert!(dist2(&py, &pz) <= dist2(&y, &z) * (1.0 + 1e-14) + 1e-14);
        prop_assert!((set.distance(&y).unwrap() - dist2(&y, &py)).abs() <= 1e-12 * (1.0 + norm2(&y)));
    }

    #[test]
    fn gradient_matches_finite_differences(obj in objective(), seed in any::<u64>()) {
        let mut rng = harness::SplitMix64::new(seed);
        let x: Vec<f64> = (0..obj.dim()).map(|_| 2.0 * rng.normal()).collect();
        let g = obj.gradient(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value(&xp).unwrap() - obj.value(&xm).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs() + obj.value(&x).unwrap()), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn dual_derivative_is_monotone((k, v) in kernel_and_vecs(2), beta in -5.0f64..5.0, t in 0.0f64..3.0, dt in 0.0f64..3.0) {
        let a = &v[1];
        let d0 = dual_derivative(&k, &v[0], a, beta, t);
        let d1 = dual_derivative(&k, &v[0], a, beta, t + dt);
        prop_assert!(d1 >= d0 - 1e-12 * (1.0 + d0.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conjugate_matches_brute_force_supremum(lambda in 0.0f64..2.0, xs in -3.0f64..3.0) {
        // ω*(x*) = sup_x x·x* − λ|x| − ½x² in one dimension
        let k = Kernel::ElasticNet { lambda };
        let r = xs.abs() + lambda + 1.0;
        let steps = (r / 1e-4) as i64;
        let sup = (-steps..=steps)
            .map(|i| i as f64 * 1e-4)
            .map(|x| x * xs - lambda * x.abs() - 0.5 * x * x)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((k.conjugate_value(&[xs]) - sup).abs() <= 1e-6);
    }

    #[test]
    fn dist_sq_value_matches_grid_oracle(c in -3.0f64..3.0, r in 0.0f64..2.0, a in -2.0f64..2.0, x in -3.0f64..3.0) {
        // one-dimensional ball: ½ min over a fine grid of (ax − q)² for |q − c| ≤ r
        let obj = InnerObjective::dist_sq(DenseMatrix::new(1, 1, vec![a]).unwrap(), ConvexSet::l2_ball(vec![c], r).unwrap());
        prop_assume!(obj.is_ok());
        let obj = obj.unwrap();
        let y = a * x;
        let best = (0..=20_000)
            .map(|i| c - r + 2.0 * r * i as f64 / 20_000.0)
            .map(|q| 0.5 * (y - q).powi(2))
            .fold(f64::INFINITY, f64::min);
        let grid_err = (1.0 + y.abs() + c.abs() + r) * 2.0 * r / 20_000.0;
        prop_assert!((obj.value(&[x]).unwrap() - best).abs() <= grid_err + 1e-12);
    }

    #[test]
    fn exact_step_minimizes_dual_on_a_grid(seed in any::<u64>()) {
        let mut rng = harness::SplitMix64::new(seed);
        let c = harness::checks::CutCase::random(&mut rng, 5).unwrap();
        let (a, beta) = (c.halfspace.normal(), c.halfspace.offset());
        let s = solve_dual_step(&c.kernel, &c.x_star, a, beta, 1.0, c.objective.lipschitz(), 1e-12).unwrap();
        let g = |t: f64| stepsize::dual_objective(&c.kernel, &c.x_star, a, beta, t);
        let gt = g(s.t);
        let span = 4.0 * s.t.max(c.step_bound());
        for i in 0..=2000 {
            let t = span * i as f64 / 2000.0;
            prop_assert!(gt <= g(t) + 1e-10 * (1.0 + gt.abs()), "g({}) = {gt} > g({t}) = {}", s.t, g(t));
        }
    }
}

#[test]
fn spectral_norm_matches_eigen_oracle() {
    let mut rng = harness::SplitMix64::new(11);
    for _ in 0..50 {
        let m = 1 + rng.index(8);
        let n = 1 + rng.index(8);
        let data = rng.normal_vec(m * n);
        let a = DenseMatrix::new(m, n, data.clone()).unwrap();
        let na = DMatrix::from_row_slice(m, n, &data);
        let ata = na.transpose() * &na;
        let top = ata
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let est = spectral_norm_sq(&a).unwrap();
        assert!((est - top).abs() <= 1e-8 * top, "{est} vs {top}");
    }
}

#[test]
fn lipschitz_constant_is_inflated_spectral_norm() {
    let a = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let obj = InnerObjective::least_squares(a, vec![0.0, 0.0]).unwrap();
    assert!(obj.lipschitz() >= 9.0);
    assert!(obj.lipschitz() <= 9.0 * (1.0 + 1e-8));
}
