//! Bregman projection method based on cutting halfspaces.
//!
//! Each iteration forms the cut `H_k` at `x_k`, picks a step `t_k` and
//! updates
//!
//! ```text
//! x_{k+1}* = x_k* − t_k ∇f(x_k),      x_{k+1} = ∇ω*(x_{k+1}*).
//! ```
//!
//! With the exact rule `x_{k+1}` is the Bregman projection of `x_k` onto
//! `H_k`. With the elastic-net kernel and least squares this is the
//! linearized Bregman iteration.

use crate::bregman::{bregman_distance, PrimalDualPair, Tolerances};
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{dist2, ensure_finite, norm2};
use crate::objectives::{Evaluation, InnerObjective};
use crate::stepsize::{dynamic_from_parts, solve_dual_step, StepSizeRule, DYNAMIC_CLAMP_FRACTION};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub rule: StepSizeRule,
    pub max_iters: usize,
    pub tolerances: Tolerances,
    pub record_trace: bool,
    /// Known optimum; enables the `recon_err` column.
    pub reference: Option<Vec<f64>>,
    /// Known inner-level minimizer; enables the `bregman_to_feasible` column.
    pub feasible_point: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(rule: StepSizeRule) -> Self {
        Self {
            rule,
            max_iters: 10_000,
            tolerances: Tolerances::default(),
            record_trace: true,
            reference: None,
            feasible_point: None,
        }
    }

    pub fn max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn grad_tol(mut self, tol: f64) -> Self {
        self.tolerances.grad_tol = tol;
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn reference(mut self, x: Vec<f64>) -> Self {
        self.reference = Some(x);
        self
    }

    pub fn feasible_point(mut self, x: Vec<f64>) -> Self {
        self.feasible_point = Some(x);
        self
    }

    /// Gradient threshold `1e-9·(1 + ‖Aᵀb‖)`.
    pub fn default_grad_tol(obj: &InnerObjective) -> f64 {
        1e-9 * (1.0 + obj.data_scale())
    }

    pub fn validate(&self, kernel: &Kernel, obj: &InnerObjective) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        self.tolerances.validate()?;
        self.rule.validate(kernel.mu(), obj.lipschitz())?;
        for (what, v) in [
            ("reference", &self.reference),
            ("feasible_point", &self.feasible_point),
        ] {
            if let Some(v) = v {
                check_dim(obj.dim(), v.len())?;
                ensure_finite(v, what)?;
            }
        }
        Ok(())
    }
}

/// One row of the trace: the state at `x_k` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Step applied at iteration `k`; zero on the terminal row.
    pub t_k: f64,
    pub grad_norm: f64,
    pub f_val: f64,
    pub omega_val: f64,
    /// `‖r(x_k)‖`: `‖Ax_k − b‖` or `dist(Ax_k, Q)`.
    pub feas: f64,
    pub recon_err: Option<f64>,
    pub bregman_to_feasible: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub x_star_final: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    /// `iterations_used + 1` rows when recording: one per visited iterate.
    pub trace: Vec<IterationRecord>,
}

/// Step size for the current iterate under `rule`.
fn choose_step(
    kernel: &Kernel,
    obj: &InnerObjective,
    pair: &PrimalDualPair,
    eval: &Evaluation,
    rule: StepSizeRule,
    tol: &Tolerances,
) -> Result<f64> {
    let mu = kernel.mu();
    let l = obj.lipschitz();
    match rule {
        StepSizeRule::Constant(t) => Ok(t),
        StepSizeRule::Dynamic { clamp } => {
            let t = dynamic_from_parts(&eval.residual, &eval.gradient)?;
            Ok(if clamp {
                t.min(DYNAMIC_CLAMP_FRACTION * 2.0 * mu / l)
            } else {
                t
            })
        }
        StepSizeRule::Exact => {
            let a = &eval.gradient;
            let gg: f64 = a.iter().map(|v| v * v).sum();
            let beta = crate::linalg::dot(a, pair.x()) - gg / l;
            let s = solve_dual_step(kernel, pair.x_star(), a, beta, mu, l, tol.bisection_tol)?;
            Ok(s.t)
        }
    }
}

fn advance(kernel: &Kernel, pair: &PrimalDualPair, gradient: &[f64], t: f64) -> PrimalDualPair {
    let x_star: Vec<f64> = pair
        .x_star()
        .iter()
        .zip(gradient)
        .map(|(xs, g)| xs - t * g)
        .collect();
    let x = kernel.mirror_map(&x_star);
    PrimalDualPair::from_parts_unchecked(x, x_star)
}

/// One iteration from `pair`. Returns the new pair and the step used.
pub fn step(
    kernel: &Kernel,
    obj: &InnerObjective,
    pair: &PrimalDualPair,
    rule: StepSizeRule,
    tol: &Tolerances,
) -> Result<(PrimalDualPair, f64)> {
    let eval = obj.evaluate(pair.x())?;
    if eval.gradient.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroGradient);
    }
    let t = choose_step(kernel, obj, pair, &eval, rule, tol)?;
    Ok((advance(kernel, pair, &eval.gradient, t), t))
}

/// Runs the method from `x0` (with `x0_star` defaulting to the canonical
/// subgradient of `ω` at `x0`) until `‖∇f(x_k)‖ ≤ grad_tol` or `max_iters`
/// steps have been taken.
pub fn solve(
    kernel: &Kernel,
    obj: &InnerObjective,
    config: &SolverConfig,
    x0: &[f64],
    x0_star: Option<&[f64]>,
) -> Result<SolveResult> {
    config.validate(kernel, obj)?;
    check_dim(obj.dim(), x0.len())?;
    let x0_star = match x0_star {
        Some(s) => s.to_vec(),
        None => kernel.initial_subgradient(x0),
    };
    let mut pair = PrimalDualPair::new(kernel, x0.to_vec(), x0_star)?;
    let tol = &config.tolerances;
    let mut trace = Vec::new();
    let mut k = 0;
    let converged = loop {
        let eval = obj.evaluate(pair.x())?;
        let grad_norm = norm2(&eval.gradient);
        if !grad_norm.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        let done = grad_norm <= tol.grad_tol;
        let stop = done || k >= config.max_iters;
        let t = if stop || grad_norm == 0.0 {
            0.0
        } else {
            choose_step(kernel, obj, &pair, &eval, config.rule, tol)?
        };
        if config.record_trace {
            trace.push(record(kernel, config, &pair, &eval, k, t, grad_norm)?);
        }
        if stop {
            break done;
        }
        pair = advance(kernel, &pair, &eval.gradient, t);
        k += 1;
    };
    let (x_final, x_star_final) = pair.into_parts();
    Ok(SolveResult {
        x_final,
        x_star_final,
        iterations_used: k,
        converged,
        trace,
    })
}

fn record(
    kernel: &Kernel,
    config: &SolverConfig,
    pair: &PrimalDualPair,
    eval: &Evaluation,
    k: usize,
    t_k: f64,
    grad_norm: f64,
) -> Result<IterationRecord> {
    let recon_err = config.reference.as_ref().map(|r| dist2(pair.x(), r));
    let bregman_to_feasible = match &config.feasible_point {
        Some(p) => Some(bregman_distance(kernel, p, pair.x_star())?),
        None => None,
    };
    Ok(IterationRecord {
        k,
        t_k,
        grad_norm,
        f_val: eval.value,
        omega_val: kernel.value(pair.x()),
        feas: norm2(&eval.residual),
        recon_err,
        bregman_to_feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn ls1(b: f64) -> InnerObjective {
        InnerObjective::least_squares(DenseMatrix::new(1, 1, vec![1.0]).unwrap(), vec![b])
            .unwrap()
            .with_lipschitz(1.0)
            .unwrap()
    }

    #[test]
    fn exact_step_projects_onto_cut() {
        let tol = Tolerances::default();
        let q = Kernel::Quadratic;
        let pair = PrimalDualPair::new(&q, vec![1.0], vec![1.0]).unwrap();
        let (next, t) = step(&q, &ls1(0.0), &pair, StepSizeRule::Exact, &tol).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(next.x(), &[0.0]);
        assert_eq!(next.x_star(), &[0.0]);

        let en = Kernel::ElasticNet { lambda: 1.0 };
        let pair = PrimalDualPair::new(&en, vec![2.0], vec![3.0]).unwrap();
        let (next, t) = step(&en, &ls1(0.0), &pair, StepSizeRule::Exact, &tol).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(next.x(), &[0.0]);
        assert_eq!(next.x_star(), &[1.0]);
    }

    #[test]
    fn constant_step_is_linearized_bregman() {
        let tol = Tolerances::default();
        let en = Kernel::ElasticNet { lambda: 1.0 };
        let pair = PrimalDualPair::new(&en, vec![2.0], vec![3.0]).unwrap();
        let (next, t) = step(&en, &ls1(0.0), &pair, StepSizeRule::Constant(1.0), &tol).unwrap();
        assert_eq!(t, 1.0);
        // x* − t Aᵀ(Ax − b) = 3 − 2, then S₁
        assert_eq!(next.x_star(), &[1.0]);
        assert_eq!(next.x(), &[0.0]);
    }

    #[test]
    fn zero_gradient_is_reported() {
        let q = Kernel::Quadratic;
        let pair = PrimalDualPair::new(&q, vec![0.0], vec![0.0]).unwrap();
        let r = step(
            &q,
            &ls1(0.0),
            &pair,
            StepSizeRule::Exact,
            &Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::ZeroGradient)));
    }

    #[test]
    fn one_dimensional_consistent_system() {
        let en = Kernel::ElasticNet { lambda: 0.5 };
        let cfg = SolverConfig::new(StepSizeRule::Exact)
            .grad_tol(1e-12)
            .max_iters(100);
        let res = solve(&en, &ls1(1.0), &cfg, &[0.0], None).unwrap();
        assert!(res.converged);
        assert!((res.x_final[0] - 1.0).abs() <= 1e-12);
        assert_eq!(res.trace.len(), res.iterations_used + 1);
        assert_eq!(res.trace.last().unwrap().t_k, 0.0);
    }

    #[test]
    fn config_validation() {
        let en = Kernel::ElasticNet { lambda: 0.5 };
        let obj = ls1(1.0);
        let bad = SolverConfig::new(StepSizeRule::Constant(2.0));
        assert!(matches!(
            solve(&en, &obj, &bad, &[0.0], None),
            Err(Error::InvalidConfig(_))
        ));
        let bad = SolverConfig::new(StepSizeRule::Exact).max_iters(0);
        assert!(solve(&en, &obj, &bad, &[0.0], None).is_err());
        let bad = SolverConfig::new(StepSizeRule::Exact).reference(vec![0.0, 1.0]);
        assert!(solve(&en, &obj, &bad, &[0.0], None).is_err());
        // x0* not a subgradient at x0
        let ok = SolverConfig::new(StepSizeRule::Exact);
        assert!(matches!(
            solve(&en, &obj, &ok, &[1.0], Some(&[0.2])),
            Err(Error::MirrorInconsistent { .. })
        ));
    }

    #[test]
    fn max_iters_stops_without_convergence() {
        let en = Kernel::ElasticNet { lambda: 5.0 };
        let cfg = SolverConfig::new(StepSizeRule::Constant(0.01))
            .max_iters(3)
            .grad_tol(1e-14);
        let res = solve(&en, &ls1(1.0), &cfg, &[0.0], None).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations_used, 3);
        assert_eq!(res.trace.len(), 4);
    }
}
