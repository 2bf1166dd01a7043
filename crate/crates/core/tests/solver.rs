use bregcut::harness::checks::descent_excess;
use bregcut::harness::{generate_instance, ConstraintKind, NoiseKind, SplitMix64};
use bregcut::linalg::{dist2, norm2};
use bregcut::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn consistent(
    m: usize,
    n: usize,
    s: usize,
    seed: u64,
) -> (harness::ProblemInstance, InnerObjective) {
    let p = generate_instance(m, n, s, NoiseKind::None, 0.0, seed).unwrap();
    let obj = p.objective(ConstraintKind::Point).unwrap();
    (p, obj)
}

#[test]
fn quadratic_constant_step_is_gradient_descent() {
    let (p, obj) = consistent(15, 30, 4, 3);
    let (m, n) = (p.m(), p.n());
    let t = 1.0 / obj.lipschitz();
    let cfg = SolverConfig::new(StepSizeRule::Constant(t))
        .max_iters(300)
        .grad_tol(1e-300);
    let res = solve(&Kernel::Quadratic, &obj, &cfg, &vec![0.0; n], None).unwrap();

    let a = p.a.data();
    let mut x = vec![0.0; n];
    for _ in 0..res.iterations_used {
        let mut r = vec![0.0; m];
        for i in 0..m {
            r[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum::<f64>() - p.b_obs[i];
        }
        let mut g = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                g[j] += a[i * n + j] * r[i];
            }
        }
        for j in 0..n {
            x[j] -= t * g[j];
        }
    }
    for (u, v) in res.x_final.iter().zip(&x) {
        assert!((u - v).abs() <= 1e-14, "{u} vs {v}");
    }
}

#[test]
fn f_values_are_nonincreasing() {
    let (p, obj) = consistent(20, 40, 5, 9);
    let k = p.kernel();
    let l = obj.lipschitz();
    for rule in [
        StepSizeRule::Constant(0.5 / l),
        StepSizeRule::Constant(1.0 / l),
        StepSizeRule::Constant(1.9 / l),
        StepSizeRule::Dynamic { clamp: true },
    ] {
        let cfg = SolverConfig::new(rule).max_iters(400).grad_tol(1e-300);
        let res = solve(&k, &obj, &cfg, &vec![0.0; 40], None).unwrap();
        for w in res.trace.windows(2) {
            assert!(
                w[1].f_val <= w[0].f_val + 1e-12 * w[0].f_val.max(1.0),
                "{rule:?} at {}",
                w[0].k
            );
        }
    }
}

#[test]
fn dual_iterates_stay_in_row_space() {
    let (p, obj) = consistent(10, 25, 3, 21);
    let k = p.kernel();
    let cfg = SolverConfig::new(StepSizeRule::Exact)
        .max_iters(200)
        .grad_tol(1e-300);
    let res = solve(&k, &obj, &cfg, &[0.0; 25], None).unwrap();
    let at = DMatrix::from_row_slice(10, 25, p.a.data()).transpose();
    let xs = DVector::from_column_slice(&res.x_star_final);
    let w = at.clone().svd(true, true).solve(&xs, 1e-12).unwrap();
    let resid = (&at * w - &xs).norm();
    assert!(resid <= 1e-8 * xs.norm().max(1.0), "{resid}");
}

#[test]
fn one_dimensional_consistent_system() {
    let a = DenseMatrix::new(1, 1, vec![1.0]).unwrap();
    let obj = InnerObjective::least_squares(a, vec![1.0]).unwrap();
    let cfg = SolverConfig::new(StepSizeRule::Exact)
        .max_iters(1000)
        .grad_tol(1e-12);
    let res = solve(
        &Kernel::ElasticNet { lambda: 0.5 },
        &obj,
        &cfg,
        &[0.0],
        None,
    )
    .unwrap();
    assert!(res.converged);
    assert!((res.x_final[0] - 1.0).abs() <= 1e-12);
}

#[test]
fn seeded_instance_reaches_feasibility() {
    let (p, obj) = consistent(100, 200, 10, 42);
    let cfg = SolverConfig::new(StepSizeRule::Exact)
        .max_iters(20_000)
        .grad_tol(1e-9);
    let res = solve(&p.kernel(), &obj, &cfg, &vec![0.0; 200], None).unwrap();
    assert!(res.converged);
    assert!(res.trace.last().unwrap().feas <= 1e-6);
    assert!(PrimalDualPair::new(&p.kernel(), res.x_final, res.x_star_final).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn basic_and_general_descent(seed in any::<u64>(), frac in 0.05f64..1.999) {
        let (p, obj) = consistent(12, 24, 3, seed);
        let k = p.kernel();
        let l = obj.lipschitz();
        for rule in [StepSizeRule::Exact, StepSizeRule::Constant(1.0 / l)] {
            prop_assert!(descent_excess(&k, &obj, rule, &p.x_true, 150).unwrap() <= 0.0, "{rule:?}");
        }
        let rule = StepSizeRule::Constant(frac / l);
        prop_assert!(descent_excess(&k, &obj, rule, &p.x_true, 150).unwrap() <= 0.0);
    }
}

/// Grid minimizer of ω over `{x ∈ ℝ² : Ax ∈ Q}`. Any minimizer has
/// `½‖x‖² ≤ ω(x₀)` for the least-norm solution `x₀` of `Ax = c`, which bounds
/// the search box.
fn brute_force_ball(kernel: &Kernel, a: &DenseMatrix, set: &ConvexSet) -> Vec<f64> {
    let na = DMatrix::from_row_slice(a.rows(), 2, a.data());
    let c = DVector::from_column_slice(set.center());
    let x0 = na.clone().svd(true, true).solve(&c, 1e-12).unwrap();
    let half = (2.0 * kernel.value(x0.as_slice())).sqrt() + 0.1;

    let feasible = |x: &[f64]| set.distance(&a.mul_vec(x).unwrap()).unwrap() <= 0.0;
    let mut best = (kernel.value(x0.as_slice()), x0.as_slice().to_vec());
    let scan = |c: [f64; 2], half: f64, h: f64, best: &mut (f64, Vec<f64>)| {
        let steps = (half / h) as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let x = [c[0] + i as f64 * h, c[1] + j as f64 * h];
                if feasible(&x) {
                    let v = kernel.value(&x);
                    if v < best.0 {
                        *best = (v, x.to_vec());
                    }
                }
            }
        }
    };
    let mut h = half / 500.0;
    scan([0.0, 0.0], half, h, &mut best);
    for _ in 0..3 {
        let c = [best.1[0], best.1[1]];
        scan(c, 3.0 * h, h / 100.0, &mut best);
        h /= 100.0;
    }
    best.1
}

#[test]
fn fdpg_matches_brute_force_on_small_problems() {
    let mut rng = SplitMix64::new(77);
    for case in 0..12 {
        let m = 1 + rng.index(2);
        let a = DenseMatrix::new(m, 2, rng.normal_vec(2 * m)).unwrap();
        let c: Vec<f64> = (0..m).map(|_| 2.0 * rng.normal()).collect();
        let r = rng.uniform_in(0.2, 1.0);
        let set = ConvexSet::l2_ball(c, r).unwrap();
        let kernel = if case % 2 == 0 {
            Kernel::Quadratic
        } else {
            Kernel::ElasticNet {
                lambda: rng.uniform_in(0.1, 1.0),
            }
        };
        let f = fdpg_solve(
            &a,
            &set,
            &kernel,
            &FdpgConfig {
                max_iters: 500_000,
                tol: 1e-13,
                ..FdpgConfig::default()
            },
        )
        .unwrap();
        let oracle = brute_force_ball(&kernel, &a, &set);
        // near a flat boundary the grid pins the value far better than the location
        assert!(
            dist2(&f.x, &oracle) <= 1e-2 * (1.0 + norm2(&oracle)),
            "case {case}: {:?} vs {oracle:?}",
            f.x
        );
        let (vf, vo) = (kernel.value(&f.x), kernel.value(&oracle));
        assert!(vf <= vo + 1e-9 * vo.max(1.0), "case {case}: {vf} > {vo}");
        assert!(vo - vf <= 1e-5 * vo.max(1.0), "case {case}: {vo} vs {vf}");
        assert!(set.distance(&a.mul_vec(&f.x).unwrap()).unwrap() <= 1e-6);
    }
}

#[test]
fn fdpg_solution_is_a_fixed_point() {
    let (p, _) = consistent(20, 40, 4, 5);
    let set = p.constraint(ConstraintKind::Point).unwrap();
    let k = p.kernel();
    let mut it = Fdpg::new(&p.a, &set, k, None).unwrap();
    let mut settled = false;
    for _ in 0..500_000 {
        if it.step().unwrap() <= 1e-13 * norm2(it.dual()).max(1.0) {
            settled = true;
            break;
        }
    }
    assert!(settled);
    let before = it.primal().to_vec();
    it.step().unwrap();
    assert!(
        dist2(&before, it.primal()) <= 1e-9 * norm2(&before).max(1.0),
        "{}",
        dist2(&before, it.primal())
    );
}
