//! Reconstruction metrics and the a-priori bounds the traces are checked
//! against.

use super::instance::ProblemInstance;
use crate::error::{check_dim, Result};
use crate::kernels::Kernel;
use crate::linalg::dist2;
use crate::objectives::ConvexSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// `‖x − x†‖₂`
    pub recon_err: f64,
    /// `λ‖x‖₁ + ½‖x‖²` with the instance's `λ`.
    pub omega_val: f64,
    /// `dist(Ax, Q)`
    pub feas: f64,
}

pub fn metrics(instance: &ProblemInstance, x: &[f64], set: &ConvexSet) -> Result<Metrics> {
    check_dim(instance.n(), x.len())?;
    let ax = instance.a.mul_vec(x)?;
    Ok(Metrics {
        recon_err: dist2(x, &instance.x_true),
        omega_val: instance.kernel().value(x),
        feas: set.distance(&ax)?,
    })
}

/// `D₀ / Σ_{k≤T} t_k` for each prefix of `steps`: entry `T` bounds
/// `f(x_{T+1}) − f̄` when every step lies in `(0, μ/L]`.
pub fn sublinear_bounds(initial_distance: f64, steps: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    steps
        .iter()
        .map(|t| {
            acc += t;
            initial_distance / acc
        })
        .collect()
}

/// Bound for a smooth kernel (`∇ω` Lipschitz with constant `ν`), valid for
/// steps in `(0, 2μ/L)`:
///
/// ```text
/// f(x_{T+1}) − f̄ ≤ (f₀ − f̄) / (1 + (f₀ − f̄) Σ_{k≤T} h(t_k)),
/// h(τ) = τ(2μ − Lτ)μ / (4ν c₀)
/// ```
///
/// with `c₀` the initial Bregman distance to the solution set. Returns `None`
/// for kernels without `ν` (elastic net with `λ > 0`).
pub fn smooth_kernel_bounds(
    kernel: &Kernel,
    lipschitz: f64,
    initial_gap: f64,
    initial_distance: f64,
    steps: &[f64],
) -> Option<Vec<f64>> {
    let nu = kernel.nu()?;
    let mu = kernel.mu();
    let h = |tau: f64| tau * (2.0 * mu - lipschitz * tau) * mu / (4.0 * nu * initial_distance);
    let mut acc = 0.0;
    Some(
        steps
            .iter()
            .map(|t| {
                acc += h(*t);
                initial_gap / (1.0 + initial_gap * acc)
            })
            .collect(),
    )
}
