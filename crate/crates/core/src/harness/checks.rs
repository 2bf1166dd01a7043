//! Randomized property suites: the identities and inequalities the method
//! relies on, each checked against an independent evaluation.
//!
//! [`Fault`] swaps in a deliberately wrong ingredient so that callers can
//! confirm the suites actually detect failures.

use super::instance::{generate_instance, ConstraintKind, NoiseKind};
use super::oracle::{feasible_horizon, oracle_bregman_projection};
use super::rng::SplitMix64;
use crate::bregman::{check_projection_vi, three_point_residual, PrimalDualPair, Tolerances};
use crate::cuts::{build_halfspace, Halfspace};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{dist2, dot, norm2, rel_scale, sub, DenseMatrix};
use crate::objectives::{ConvexSet, InnerObjective};
use crate::solver::{step, SolverConfig};
use crate::stepsize::{solve_dual_step, StepSizeRule};

/// Identity and inequality slack, relative to the magnitude of the terms.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Hyperplane residual required of an interior exact step.
pub const HYPERPLANE_TOL: f64 = 1e-8;
/// Agreement between the exact-step iterate and the brute-force projection.
pub const ORACLE_TOL: f64 = 1e-6;
/// Descent-inequality slack, relative to `max(1, D)`.
pub const DESCENT_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Uses `min{|x|−λ, 0}·sign(x)` in place of the soft shrinkage.
    MinFormShrinkage,
    /// Inflates every exact step by half.
    OvershootStep,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "min-shrink" => Some(Fault::MinFormShrinkage),
            "overshoot" => Some(Fault::OvershootStep),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest normalized violation seen.
    pub worst: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    report: SuiteReport,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            report: SuiteReport {
                name,
                cases: 0,
                failures: 0,
                worst: 0.0,
            },
        }
    }

    /// `excess ≤ 0` is a pass.
    fn record(&mut self, excess: f64) {
        self.report.cases += 1;
        if !(excess <= 0.0) {
            self.report.failures += 1;
        }
        if excess > self.report.worst || excess.is_nan() {
            self.report.worst = excess;
        }
    }
}

fn mirror(kernel: &Kernel, v: &[f64], fault: Option<Fault>) -> Vec<f64> {
    match fault {
        Some(Fault::MinFormShrinkage) => {
            let l = kernel.lambda();
            v.iter()
                .map(|x| (x.abs() - l).min(0.0) * x.signum())
                .collect()
        }
        _ => kernel.mirror_map(v),
    }
}

pub fn random_kernel(rng: &mut SplitMix64) -> Kernel {
    if rng.uniform() < 0.3 {
        Kernel::Quadratic
    } else {
        Kernel::ElasticNet {
            lambda: rng.uniform_in(0.05, 2.0),
        }
    }
}

fn scaled_normals(rng: &mut SplitMix64, n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|_| s * rng.normal()).collect()
}

/// A random least-squares cut: kernel, objective, dual iterate and the cut
/// built at its mirror image.
#[derive(Clone, Debug)]
pub struct CutCase {
    pub kernel: Kernel,
    pub objective: InnerObjective,
    pub x_star: Vec<f64>,
    pub halfspace: Halfspace,
}

impl CutCase {
    pub fn random(rng: &mut SplitMix64, max_dim: usize) -> Result<Self> {
        loop {
            let n = 1 + rng.index(max_dim);
            let m = 1 + rng.index(max_dim + 2);
            let kernel = random_kernel(rng);
            let a = DenseMatrix::new(m, n, rng.normal_vec(m * n))?;
            let b = scaled_normals(rng, m, 2.0);
            let objective = InnerObjective::least_squares(a, b)?;
            let x_star = scaled_normals(rng, n, 2.0);
            let x = kernel.mirror_map(&x_star);
            match build_halfspace(&objective, &x) {
                Ok(halfspace) => {
                    return Ok(Self {
                        kernel,
                        objective,
                        x_star,
                        halfspace,
                    })
                }
                Err(Error::ZeroGradient) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn step_bound(&self) -> f64 {
        self.kernel.mu() / self.objective.lipschitz()
    }
}

/// Points of `H` scattered around `z`.
pub fn sample_halfspace(
    rng: &mut SplitMix64,
    h: &Halfspace,
    z: &[f64],
    count: usize,
) -> Vec<Vec<f64>> {
    let a = h.normal();
    let aa = dot(a, a);
    let spread = 1.0 + norm2(z);
    (0..count)
        .map(|_| {
            let mut y: Vec<f64> = z.iter().map(|zi| zi + spread * rng.normal()).collect();
            let v = h.violation(&y);
            if v > 0.0 {
                let push = (v + spread * rng.uniform() * aa.sqrt()) / aa;
                y.iter_mut().zip(a).for_each(|(yi, ai)| *yi -= push * ai);
            }
            y
        })
        .collect()
}

pub fn three_point_suite(
    rng: &mut SplitMix64,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteReport> {
    let mut t = Tally::new("three_point");
    for _ in 0..cases {
        let k = random_kernel(rng);
        let n = 1 + rng.index(6);
        let u = scaled_normals(rng, n, 3.0);
        let ps = scaled_normals(rng, n, 3.0);
        let qs = scaled_normals(rng, n, 3.0);
        let res = if fault.is_none() {
            three_point_residual(&k, &u, &ps, &qs)?
        } else {
            let p = mirror(&k, &ps, fault);
            let d = |y: &[f64], s: &[f64]| k.conjugate_value(s) - dot(s, y) + k.value(y);
            (d(&u, &ps) - d(&u, &qs) + d(&p, &qs) - dot(&sub(&qs, &ps), &sub(&u, &p))).abs()
        };
        let s = (norm2(&u) + norm2(&ps) + norm2(&qs)).powi(2) * (1.0 + k.lambda());
        t.record(res - IDENTITY_TOL * rel_scale(&[s]));
    }
    Ok(t.report)
}

pub fn fenchel_suite(
    rng: &mut SplitMix64,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteReport> {
    let mut t = Tally::new("fenchel");
    for _ in 0..cases {
        let k = random_kernel(rng);
        let n = 1 + rng.index(8);
        let xs = scaled_normals(rng, n, 3.0);
        let x = mirror(&k, &xs, fault);
        let lhs = k.value(&x) + k.conjugate_value(&xs);
        let rhs = dot(&x, &xs);
        t.record((lhs - rhs).abs() - IDENTITY_TOL * rel_scale(&[lhs, rhs]));
    }
    Ok(t.report)
}

fn random_objective(rng: &mut SplitMix64) -> Result<InnerObjective> {
    let n = 1 + rng.index(6);
    let m = 1 + rng.index(6);
    let a = DenseMatrix::new(m, n, rng.normal_vec(m * n))?;
    let c = scaled_normals(rng, m, 2.0);
    let radius = rng.uniform_in(0.0, 2.0);
    match rng.index(3) {
        0 => InnerObjective::least_squares(a, c),
        1 => InnerObjective::dist_sq(a, ConvexSet::l2_ball(c, radius)?),
        _ => InnerObjective::dist_sq(a, ConvexSet::linf_box(c, radius)?),
    }
}

pub fn cocoercivity_suite(rng: &mut SplitMix64, cases: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("cocoercivity");
    for _ in 0..cases {
        let obj = random_objective(rng)?;
        let n = obj.dim();
        let u = scaled_normals(rng, n, 3.0);
        let v = scaled_normals(rng, n, 3.0);
        let gu = obj.gradient(&u)?;
        let gv = obj.gradient(&v)?;
        let dg = sub(&gu, &gv);
        let lhs = dot(&dg, &sub(&u, &v));
        let rhs = dot(&dg, &dg) / obj.lipschitz();
        t.record(
            rhs - lhs
                - IDENTITY_TOL
                    * rel_scale(&[lhs, rhs, norm2(&gu) * norm2(&u), norm2(&gv) * norm2(&v)]),
        );
    }
    Ok(t.report)
}

pub fn mirror_consistency_suite(
    rng: &mut SplitMix64,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteReport> {
    let mut t = Tally::new("mirror_consistency");
    let tol = Tolerances::default();
    for _ in 0..cases {
        let c = CutCase::random(rng, 6)?;
        let rule = match rng.index(3) {
            0 => StepSizeRule::Exact,
            1 => StepSizeRule::Constant(rng.uniform_in(0.05, 1.95) * c.step_bound()),
            _ => StepSizeRule::Dynamic { clamp: true },
        };
        let mut pair = PrimalDualPair::from_dual(&c.kernel, c.x_star.clone())?;
        for _ in 0..5 {
            match step(&c.kernel, &c.objective, &pair, rule, &tol) {
                Ok((next, _)) => pair = next,
                Err(Error::ZeroGradient) => break,
                Err(e) => return Err(e),
            }
        }
        let expected = mirror(&c.kernel, pair.x_star(), fault);
        let gap = dist2(pair.x(), &expected) / rel_scale(&[norm2(pair.x())]);
        t.record(gap - crate::bregman::MIRROR_TOL);
    }
    Ok(t.report)
}

fn exact_step_for(c: &CutCase, fault: Option<Fault>) -> Result<(f64, bool)> {
    let s = solve_dual_step(
        &c.kernel,
        &c.x_star,
        c.halfspace.normal(),
        c.halfspace.offset(),
        c.kernel.mu(),
        c.objective.lipschitz(),
        Tolerances::default().bisection_tol,
    )?;
    let t = if fault == Some(Fault::OvershootStep) {
        1.5 * s.t
    } else {
        s.t
    };
    Ok((t, s.interior))
}

pub fn dual_step_suite(
    rng: &mut SplitMix64,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteReport> {
    let mut t = Tally::new("dual_step_range");
    for _ in 0..cases {
        let c = CutCase::random(rng, 8)?;
        let (step, interior) = exact_step_for(&c, fault)?;
        // the projection step is never shorter than μ/L
        let bound = c.step_bound();
        let mut excess = if step > 0.0 {
            bound * (1.0 - 1e-9) - step
        } else {
            1.0
        };
        if interior {
            let z = c.kernel.mirror_map(&crate::linalg::add_scaled(
                &c.x_star,
                -step,
                c.halfspace.normal(),
            ));
            excess = excess.max(c.halfspace.hyperplane_residual(&z) - HYPERPLANE_TOL);
        }
        t.record(excess);
    }
    Ok(t.report)
}

pub fn projection_suite(
    rng: &mut SplitMix64,
    cases: usize,
    fault: Option<Fault>,
) -> Result<SuiteReport> {
    let mut t = Tally::new("projection_vi");
    let residual_tol = Tolerances::default().residual_tol;
    for _ in 0..cases {
        let c = CutCase::random(rng, 5)?;
        let (step, _) = exact_step_for(&c, fault)?;
        let z_star = crate::linalg::add_scaled(&c.x_star, -step, c.halfspace.normal());
        let z = c.kernel.mirror_map(&z_star);
        let t_max = feasible_horizon(
            &c.kernel,
            &c.x_star,
            &c.halfspace,
            2.0 * c.step_bound(),
            residual_tol,
        )?;
        let oracle = oracle_bregman_projection(
            &c.kernel,
            &c.x_star,
            &c.halfspace,
            t_max,
            2001,
            residual_tol,
        )?;
        let mut excess = dist2(&z, &oracle) - ORACLE_TOL;
        let samples = sample_halfspace(rng, &c.halfspace, &z, 50);
        if !check_projection_vi(&c.x_star, &z, &z_star, &samples, residual_tol)? {
            excess = excess.max(1.0);
        }
        t.record(excess);
    }
    Ok(t.report)
}

/// Per-iteration Bregman decrease against the planted solution of small
/// consistent systems.
pub fn descent_suite(rng: &mut SplitMix64, cases: usize, iters: usize) -> Result<SuiteReport> {
    let mut t = Tally::new("descent");
    for _ in 0..cases {
        let m = 4 + rng.index(6);
        let p = generate_instance(m, 2 * m, 2, NoiseKind::None, 0.0, rng.next_u64())?;
        let obj = p.objective(ConstraintKind::Point)?;
        let kernel = p.kernel();
        let l = obj.lipschitz();
        for rule in [StepSizeRule::Exact, StepSizeRule::Constant(kernel.mu() / l)] {
            let excess = descent_excess(&kernel, &obj, rule, &p.x_true, iters)?;
            t.record(excess);
        }
    }
    Ok(t.report)
}

/// Largest violation of `D_{k+1} ≤ D_k − c(t_k)‖∇f(x_k)‖² + slack` over a run,
/// with `c = μ/(2L²)` for the exact rule and `t/L − t²/(2μ)` for constants.
pub fn descent_excess(
    kernel: &Kernel,
    obj: &InnerObjective,
    rule: StepSizeRule,
    feasible: &[f64],
    iters: usize,
) -> Result<f64> {
    let mu = kernel.mu();
    let l = obj.lipschitz();
    let cfg = SolverConfig::new(rule)
        .max_iters(iters)
        .grad_tol(1e-300)
        .feasible_point(feasible.to_vec());
    let res = crate::solver::solve(kernel, obj, &cfg, &vec![0.0; obj.dim()], None)?;
    let mut worst = f64::NEG_INFINITY;
    for w in res.trace.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        let dk = cur.bregman_to_feasible.unwrap_or(f64::NAN);
        let dk1 = next.bregman_to_feasible.unwrap_or(f64::NAN);
        let coef = match rule {
            StepSizeRule::Exact => mu / (2.0 * l * l),
            _ => cur.t_k / l - cur.t_k * cur.t_k / (2.0 * mu),
        };
        let excess =
            dk1 - (dk - coef * cur.grad_norm * cur.grad_norm) - DESCENT_SLACK * rel_scale(&[dk]);
        worst = worst.max(excess);
    }
    Ok(worst)
}

/// All suites, in a fixed order, from one seed.
pub fn run_suites(seed: u64, cases: usize, fault: Option<Fault>) -> Result<Vec<SuiteReport>> {
    if cases == 0 {
        return Err(Error::InvalidParameter(
            "at least one case per suite is required".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    Ok(vec![
        three_point_suite(&mut rng, cases, fault)?,
        fenchel_suite(&mut rng, cases, fault)?,
        cocoercivity_suite(&mut rng, cases)?,
        mirror_consistency_suite(&mut rng, cases, fault)?,
        dual_step_suite(&mut rng, cases, fault)?,
        projection_suite(&mut rng, cases.min(200), fault)?,
        descent_suite(&mut rng, cases.div_ceil(10), 100)?,
    ])
}
