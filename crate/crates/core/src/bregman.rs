//! Bregman geometry: distances, the three-point identity, mirror-consistent
//! iterate pairs and the variational inequality that certifies a projection.

use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{dot, ensure_finite, norm2, rel_scale, sub};

/// Relative band inside which a negative distance is treated as roundoff.
pub const DISTANCE_ROUNDOFF: f64 = 1e-12;

/// Relative tolerance for the mirror-consistency invariant `x = ∇ω*(x*)`.
pub const MIRROR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Stop when `‖∇f(x_k)‖` drops to this value.
    pub grad_tol: f64,
    /// Relative slack for membership and identity checks.
    pub residual_tol: f64,
    /// Final bracket width of the exact-step bisection, relative to the bracket end.
    pub bisection_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            residual_tol: 1e-10,
            bisection_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(grad_tol: f64, residual_tol: f64, bisection_tol: f64) -> Result<Self> {
        let t = Self {
            grad_tol,
            residual_tol,
            bisection_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("residual_tol", self.residual_tol),
            ("bisection_tol", self.bisection_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The iterate `(x_k, x_k*)` with `x_k = ∇ω*(x_k*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualPair {
    x: Vec<f64>,
    x_star: Vec<f64>,
}

impl PrimalDualPair {
    /// Builds the pair from its dual part; the primal part is the mirror image.
    pub fn from_dual(kernel: &Kernel, x_star: Vec<f64>) -> Result<Self> {
        ensure_finite(&x_star, "dual iterate")?;
        Ok(Self {
            x: kernel.mirror_map(&x_star),
            x_star,
        })
    }

    /// Validates that `x_star ∈ ∂ω(x)`.
    pub fn new(kernel: &Kernel, x: Vec<f64>, x_star: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), x_star.len())?;
        ensure_finite(&x, "primal iterate")?;
        ensure_finite(&x_star, "dual iterate")?;
        let gap = mirror_gap(kernel, &x, &x_star);
        if gap > MIRROR_TOL {
            return Err(Error::MirrorInconsistent { gap });
        }
        Ok(Self { x, x_star })
    }

    pub(crate) fn from_parts_unchecked(x: Vec<f64>, x_star: Vec<f64>) -> Self {
        Self { x, x_star }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.x_star)
    }

    pub fn is_consistent(&self, kernel: &Kernel) -> bool {
        mirror_gap(kernel, &self.x, &self.x_star) <= MIRROR_TOL
    }
}

/// `‖x − ∇ω*(x*)‖ / max(1, ‖x‖)`
pub fn mirror_gap(kernel: &Kernel, x: &[f64], x_star: &[f64]) -> f64 {
    let mapped = kernel.mirror_map(x_star);
    norm2(&sub(x, &mapped)) / rel_scale(&[norm2(x)])
}

/// `D_ω^{x*}(y, x)` with `x = ∇ω*(x*)`, evaluated in the conjugate form
/// `ω*(x*) − ⟨x*, y⟩ + ω(y)`.
pub fn bregman_distance(kernel: &Kernel, y: &[f64], x_star: &[f64]) -> Result<f64> {
    check_dim(y.len(), x_star.len())?;
    let conj = kernel.conjugate_value(x_star);
    let pairing = dot(x_star, y);
    let val = kernel.value(y);
    clamp_distance(conj - pairing + val, &[conj, pairing, val])
}

/// The same distance seen from the conjugate side, `D_{ω*}^{p}(q*, p*)`,
/// with `p = ∇ω*(p*)`. Equals `D_ω^{q*}(p, q)` whenever `q = ∇ω*(q*)`.
pub fn conjugate_bregman_distance(kernel: &Kernel, q_star: &[f64], p_star: &[f64]) -> Result<f64> {
    check_dim(q_star.len(), p_star.len())?;
    let p = kernel.mirror_map(p_star);
    let cq = kernel.conjugate_value(q_star);
    let cp = kernel.conjugate_value(p_star);
    let lin = dot(&p, &sub(q_star, p_star));
    clamp_distance(cq - cp - lin, &[cq, cp, lin])
}

fn clamp_distance(d: f64, terms: &[f64]) -> Result<f64> {
    if !d.is_finite() {
        return Err(Error::NonFinite("Bregman distance"));
    }
    if d >= 0.0 {
        return Ok(d);
    }
    if d >= -DISTANCE_ROUNDOFF * rel_scale(terms) {
        Ok(0.0)
    } else {
        Err(Error::NegativeDistance { value: d })
    }
}

/// `|D(u,p) − D(u,q) + D(p,q) − ⟨q*−p*, u−p⟩|` with `p, q` the mirror images
/// of `p*, q*`. Zero up to roundoff for any triple.
pub fn three_point_residual(
    kernel: &Kernel,
    u: &[f64],
    p_star: &[f64],
    q_star: &[f64],
) -> Result<f64> {
    check_dim(u.len(), p_star.len())?;
    check_dim(u.len(), q_star.len())?;
    let p = kernel.mirror_map(p_star);
    let d_up = bregman_distance(kernel, u, p_star)?;
    let d_uq = bregman_distance(kernel, u, q_star)?;
    let d_pq = bregman_distance(kernel, &p, q_star)?;
    let cross = dot(&sub(q_star, p_star), &sub(u, &p));
    Ok((d_up - d_uq + d_pq - cross).abs())
}

/// Checks `⟨z* − x*, y − z⟩ ≥ 0` for every sample `y` of the candidate set,
/// with slack `residual_tol · max(1, ‖z*−x*‖·‖y−z‖)`.
///
/// A `true` result certifies `z` as the Bregman projection of `∇ω*(x*)`
/// onto any convex set the samples are drawn from, as far as the samples
/// can tell.
pub fn check_projection_vi(
    x_star: &[f64],
    z: &[f64],
    z_star: &[f64],
    samples: &[Vec<f64>],
    residual_tol: f64,
) -> Result<bool> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    check_dim(z.len(), x_star.len())?;
    check_dim(z.len(), z_star.len())?;
    let shift = sub(z_star, x_star);
    let shift_norm = norm2(&shift);
    for y in samples {
        check_dim(z.len(), y.len())?;
        let d = sub(y, z);
        let lhs = dot(&shift, &d);
        if lhs < -residual_tol * rel_scale(&[shift_norm * norm2(&d)]) {
            return Ok(false);
        }
    }
    Ok(true)
}
