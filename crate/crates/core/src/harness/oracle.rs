//! Brute-force Bregman projection onto a cut, for testing the exact step.
//!
//! The projection of `x = ∇ω*(x*)` onto `H` lies on the curve
//! `y(t) = ∇ω*(x* − t a)`. Along it `D^{x*}(y(t), x)` is nondecreasing and
//! the violation `⟨a, y(t)⟩ − β` nonincreasing, so
//! `D(y(t)) + ρ·max(0, ⟨a, y(t)⟩ − β)` is unimodal on `[0, T]` for
//! `ρ ≥ T`. The oracle scans a grid, keeps the best feasible point, then
//! refines that penalty by golden-section search around it. It never touches
//! the dual derivative.

use crate::bregman::bregman_distance;
use crate::cuts::Halfspace;
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::add_scaled;

const GOLDEN_ITERS: usize = 200;

/// Smallest `start · 2^j` whose curve point lies in `H`: a scan range for
/// [`oracle_bregman_projection`] that is guaranteed to hold a candidate.
pub fn feasible_horizon(
    kernel: &Kernel,
    x_star: &[f64],
    halfspace: &Halfspace,
    start: f64,
    residual_tol: f64,
) -> Result<f64> {
    check_dim(halfspace.normal().len(), x_star.len())?;
    if !(start > 0.0) {
        return Err(Error::InvalidParameter(
            "scan range must be positive".into(),
        ));
    }
    let mut t = start;
    for _ in 0..200 {
        if halfspace.contains(
            &kernel.mirror_map(&add_scaled(x_star, -t, halfspace.normal())),
            residual_tol,
        )? {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::NoFeasibleCandidate)
}

/// Scans `t ∈ [0, t_max]` on `grid_points` samples.
pub fn oracle_bregman_projection(
    kernel: &Kernel,
    x_star: &[f64],
    halfspace: &Halfspace,
    t_max: f64,
    grid_points: usize,
    residual_tol: f64,
) -> Result<Vec<f64>> {
    check_dim(halfspace.normal().len(), x_star.len())?;
    if grid_points < 2 || !(t_max > 0.0) {
        return Err(Error::InvalidParameter(
            "oracle needs at least two grid points on a positive range".into(),
        ));
    }
    let a = halfspace.normal();
    let curve = |t: f64| kernel.mirror_map(&add_scaled(x_star, -t, a));
    let x = curve(0.0);
    if halfspace.contains(&x, residual_tol)? {
        return Ok(x);
    }

    let h = t_max / (grid_points - 1) as f64;
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for i in 0..grid_points {
        let y = curve(i as f64 * h);
        if !halfspace.contains(&y, residual_tol)? {
            continue;
        }
        let d = bregman_distance(kernel, &y, x_star)?;
        if best.as_ref().is_none_or(|b| d < b.1) {
            best = Some((i, d, y));
        }
    }
    let (i_best, d_best, y_best) = best.ok_or(Error::NoFeasibleCandidate)?;

    let rho = 2.0 * t_max;
    let penalized = |t: f64| -> Result<f64> {
        let y = curve(t);
        Ok(bregman_distance(kernel, &y, x_star)? + rho * halfspace.violation(&y).max(0.0))
    };
    let mut lo = (i_best.saturating_sub(1)) as f64 * h;
    let mut hi = ((i_best + 1).min(grid_points - 1)) as f64 * h;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = penalized(c)?;
    let mut fd = penalized(d)?;
    for _ in 0..GOLDEN_ITERS {
        if hi - lo <= 1e-16 * t_max {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = penalized(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = penalized(d)?;
        }
    }
    let y_ref = curve(0.5 * (lo + hi));
    if halfspace.contains(&y_ref, residual_tol)?
        && bregman_distance(kernel, &y_ref, x_star)? <= d_best
    {
        Ok(y_ref)
    } else {
        Ok(y_best)
    }
}
