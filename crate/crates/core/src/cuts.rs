//! The cutting halfspace `H_k = {x : ⟨a_k, x⟩ ≤ β_k}` with `a_k = ∇f(x_k)` and
//! `β_k = ⟨a_k, x_k⟩ − ‖a_k‖²/L`.
//!
//! Cocoercivity of `∇f` puts every minimizer of `f` inside `H_k`, while `x_k`
//! violates the constraint by exactly `‖a_k‖²/L`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, rel_scale};
use crate::objectives::InnerObjective;

#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroGradient);
        }
        if !offset.is_finite() || !normal.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("halfspace"));
        }
        Ok(Self { normal, offset })
    }

    /// Cut from the gradient `a = ∇f(x)` at `x`.
    pub fn from_gradient(gradient: Vec<f64>, x: &[f64], lipschitz: f64) -> Result<Self> {
        check_dim(gradient.len(), x.len())?;
        let beta = dot(&gradient, x) - dot(&gradient, &gradient) / lipschitz;
        Self::new(gradient, beta)
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `⟨a, x⟩ − β`; positive outside the halfspace.
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn check_scale(&self, x: &[f64]) -> f64 {
        rel_scale(&[self.offset, norm2(&self.normal) * norm2(x)])
    }

    pub fn contains(&self, x: &[f64], residual_tol: f64) -> Result<bool> {
        check_dim(self.normal.len(), x.len())?;
        Ok(self.violation(x) <= residual_tol * self.check_scale(x))
    }

    /// `|⟨a, x⟩ − β| / max(1, |β|, ‖a‖·‖x‖)`
    pub fn hyperplane_residual(&self, x: &[f64]) -> f64 {
        self.violation(x).abs() / self.check_scale(x)
    }
}

/// Builds `H_k` at `x_k`. A vanishing gradient is reported as
/// [`Error::ZeroGradient`]: `x_k` is already an inner-level minimizer.
pub fn build_halfspace(obj: &InnerObjective, x_k: &[f64]) -> Result<Halfspace> {
    let g = obj.gradient(x_k)?;
    Halfspace::from_gradient(g, x_k, obj.lipschitz())
}
