//! Step-size rules.
//!
//! The exact rule minimizes the one-dimensional dual of the projection onto
//! the current cut,
//!
//! ```text
//! g(t) = ω*(x* − t a) + β t,        g'(t) = −⟨a, ∇ω*(x* − t a)⟩ + β,
//! ```
//!
//! over `t > 0`. `g'` is nondecreasing and `g'(0) = −‖a‖²/L < 0` for a cut
//! built at a non-stationary point. Because `∇ω*` is `1/μ`-Lipschitz,
//! `g'(μ/L) ≤ 0`, so the smallest minimizer is never below `μ/L`; it equals
//! `μ/L` for the quadratic kernel and whenever no coordinate of the dual
//! path enters the shrinkage dead zone, and exceeds it otherwise.

use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::dot;
use crate::objectives::InnerObjective;

const MAX_BISECTIONS: usize = 200;
const MAX_DOUBLINGS: usize = 200;

/// Fraction of `2μ/L` used as the ceiling when dynamic steps are clamped.
pub const DYNAMIC_CLAMP_FRACTION: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeRule {
    /// Exact minimizer of the dual `g(t)`: the Bregman projection onto the cut.
    Exact,
    Constant(f64),
    /// `‖r(x)‖² / ‖Aᵀ r(x)‖²`. With `clamp`, capped just below `2μ/L`.
    Dynamic {
        clamp: bool,
    },
}

impl StepSizeRule {
    /// Constant steps must lie in the open interval `(0, 2μ/L)`.
    pub fn validate(&self, mu: f64, lipschitz: f64) -> Result<()> {
        if let StepSizeRule::Constant(t) = *self {
            let upper = 2.0 * mu / lipschitz;
            if !(t > 0.0 && t < upper) {
                return Err(Error::InvalidConfig(format!(
                    "constant step {t} outside (0, {upper})"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepSizeRule::Exact => "exact",
            StepSizeRule::Constant(_) => "constant",
            StepSizeRule::Dynamic { .. } => "dynamic",
        }
    }
}

/// `g(t) = ω*(x* − t a) + β t`
pub fn dual_objective(kernel: &Kernel, x_star: &[f64], a: &[f64], beta: f64, t: f64) -> f64 {
    let lambda = kernel.lambda();
    let conj: f64 = x_star
        .iter()
        .zip(a)
        .map(|(xs, ai)| {
            let s = crate::kernels::shrink_scalar(xs - t * ai, lambda);
            s * s
        })
        .sum();
    0.5 * conj + beta * t
}

/// `g'(t) = −⟨a, ∇ω*(x* − t a)⟩ + β`
pub fn dual_derivative(kernel: &Kernel, x_star: &[f64], a: &[f64], beta: f64, t: f64) -> f64 {
    let s: f64 = x_star
        .iter()
        .zip(a)
        .map(|(xs, ai)| ai * kernel.mirror_scalar(xs - t * ai))
        .sum();
    beta - s
}

/// Outcome of the exact dual solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualStep {
    pub t: f64,
    /// A root of `g'` was bracketed, so the produced iterate lies on the
    /// bounding hyperplane up to the bracket width.
    pub interior: bool,
    /// `g'(0) ≥ 0` in floating point; the cut is below roundoff and `μ/L`
    /// was returned.
    pub degenerate: bool,
}

/// Exact step, the smallest minimizer of `g` on `t > 0`. See [`solve_dual_step`].
pub fn exact_step(
    kernel: &Kernel,
    x_star: &[f64],
    a: &[f64],
    beta: f64,
    mu: f64,
    lipschitz: f64,
    bisection_tol: f64,
) -> Result<f64> {
    solve_dual_step(kernel, x_star, a, beta, mu, lipschitz, bisection_tol).map(|s| s.t)
}

/// Root of `g'` by bracketing and bisection.
///
/// The bracket starts at `[0, μ/L]` and its right end is doubled while
/// `g'` is still negative there. It is then halved until its width is
/// `bisection_tol` times its right end, and the final point is the secant
/// root inside the last bracket (exact when `g'` is affine there, which holds
/// away from the shrinkage kinks).
pub fn solve_dual_step(
    kernel: &Kernel,
    x_star: &[f64],
    a: &[f64],
    beta: f64,
    mu: f64,
    lipschitz: f64,
    bisection_tol: f64,
) -> Result<DualStep> {
    check_dim(x_star.len(), a.len())?;
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroGradient);
    }
    if !(mu > 0.0 && lipschitz > 0.0 && bisection_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exact step needs μ, L, tol > 0 (got {mu}, {lipschitz}, {bisection_tol})"
        )));
    }
    let upper = mu / lipschitz;
    let d = |t: f64| dual_derivative(kernel, x_star, a, beta, t);

    let d_lo0 = d(0.0);
    if !(d_lo0 < 0.0) {
        return Ok(DualStep {
            t: upper,
            interior: false,
            degenerate: true,
        });
    }
    let (mut lo, mut d_lo) = (0.0_f64, d_lo0);
    let (mut hi, mut d_hi) = (upper, d(upper));
    let mut doublings = 0;
    while d_hi < 0.0 {
        if doublings == MAX_DOUBLINGS || !d_hi.is_finite() {
            return Err(Error::NonFinite("dual step bracket"));
        }
        (lo, d_lo) = (hi, d_hi);
        hi *= 2.0;
        d_hi = d(hi);
        doublings += 1;
    }
    let width = bisection_tol * hi;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let dm = d(mid);
        if dm == 0.0 {
            return Ok(DualStep {
                t: mid,
                interior: true,
                degenerate: false,
            });
        }
        if dm < 0.0 {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
            d_hi = dm;
        }
    }

    let secant = (lo + (hi - lo) * (-d_lo) / (d_hi - d_lo)).clamp(lo, hi);
    let mut best = (hi, d_hi.abs());
    if secant > 0.0 {
        let ds = d(secant).abs();
        if ds < best.1 {
            best = (secant, ds);
        }
    }
    if lo > 0.0 && d_lo.abs() < best.1 {
        best = (lo, d_lo.abs());
    }
    Ok(DualStep {
        t: best.0,
        interior: true,
        degenerate: false,
    })
}

/// `‖r(x)‖² / ‖Aᵀ r(x)‖²` with `r` the residual of `f`.
pub fn dynamic_step(obj: &InnerObjective, x: &[f64]) -> Result<f64> {
    let eval = obj.evaluate(x)?;
    dynamic_from_parts(&eval.residual, &eval.gradient)
}

pub(crate) fn dynamic_from_parts(residual: &[f64], gradient: &[f64]) -> Result<f64> {
    let rr = dot(residual, residual);
    let gg = dot(gradient, gradient);
    if rr == 0.0 || gg == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(rr / gg)
}
