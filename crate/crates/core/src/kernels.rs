//! Strongly convex kernels `ω` with closed-form conjugates.
//!
//! Both kernels are exactly 1-strongly convex, so the mirror map `∇ω*` is
//! 1-Lipschitz. For the elastic-net kernel `λ‖x‖₁ + ½‖x‖²` the conjugate is
//! `ω*(x*) = ½‖S_λ(x*)‖²` and the mirror map is the soft shrinkage `S_λ`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm1};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `λ‖x‖₁ + ½‖x‖²`
    ElasticNet { lambda: f64 },
    /// `½‖x‖²`
    Quadratic,
}

/// `sign(x)·max(|x| − λ, 0)` componentwise.
pub fn soft_shrink(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shrinkage threshold must be nonnegative, got {lambda}"
        )));
    }
    Ok(x.iter().map(|&v| shrink_scalar(v, lambda)).collect())
}

#[inline]
pub(crate) fn shrink_scalar(v: f64, lambda: f64) -> f64 {
    let mag = v.abs() - lambda;
    if mag > 0.0 {
        mag.copysign(v)
    } else {
        0.0
    }
}

impl Kernel {
    pub fn elastic_net(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "elastic-net weight must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Kernel::ElasticNet { lambda })
    }

    /// The ℓ₁ weight; zero for the quadratic kernel.
    pub fn lambda(&self) -> f64 {
        match *self {
            Kernel::ElasticNet { lambda } => lambda,
            Kernel::Quadratic => 0.0,
        }
    }

    /// Strong-convexity modulus.
    pub fn mu(&self) -> f64 {
        1.0
    }

    /// Lipschitz constant of `∇ω`, when `ω` is smooth.
    pub fn nu(&self) -> Option<f64> {
        if self.lambda() == 0.0 {
            Some(1.0)
        } else {
            None
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.lambda() * norm1(x) + 0.5 * dot(x, x)
    }

    pub fn conjugate_value(&self, x_star: &[f64]) -> f64 {
        let lambda = self.lambda();
        0.5 * x_star
            .iter()
            .map(|&v| {
                let s = shrink_scalar(v, lambda);
                s * s
            })
            .sum::<f64>()
    }

    /// `∇ω*(x*)`
    pub fn mirror_map(&self, x_star: &[f64]) -> Vec<f64> {
        let lambda = self.lambda();
        x_star.iter().map(|&v| shrink_scalar(v, lambda)).collect()
    }

    pub(crate) fn mirror_scalar(&self, v: f64) -> f64 {
        shrink_scalar(v, self.lambda())
    }

    /// A subgradient `x₀* ∈ ∂ω(x₀)`. At zero components the element 0 of
    /// `[−λ, λ]` is chosen.
    pub fn initial_subgradient(&self, x0: &[f64]) -> Vec<f64> {
        let lambda = self.lambda();
        x0.iter()
            .map(|&v| {
                if v == 0.0 {
                    0.0
                } else {
                    lambda.copysign(v) + v
                }
            })
            .collect()
    }
}
