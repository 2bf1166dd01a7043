//! Fast dual proximal gradient (FDPG) reference solver for
//! `min ω(x) s.t. Ax ∈ Q`, i.e. `g = ω`, `h = δ_Q` in `min g(x) + h(Ax)`.
//!
//! ```text
//! u_k     = ∇ω*(Aᵀ w_k)
//! y_{k+1} = w_k − (1/L) A u_k + (1/L) P_Q(A u_k − L w_k)
//! t_{k+1} = (1 + √(1 + 4 t_k²)) / 2
//! w_{k+1} = y_{k+1} + ((t_k − 1)/t_{k+1}) (y_{k+1} − y_k)
//! ```
//!
//! with `L = ‖A‖₂²/μ` and `w₀ = y₀ = 0`, `t₀ = 1`.

use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{dist2, norm2, rel_scale, DenseMatrix};
use crate::objectives::{spectral_norm_sq, ConvexSet, LIPSCHITZ_INFLATION};

#[derive(Clone, Debug)]
pub struct FdpgConfig {
    pub max_iters: usize,
    /// Dual Lipschitz constant; `None` means `‖A‖₂²/μ`.
    pub step_l: Option<f64>,
    /// Stop when `‖y_{k+1} − y_k‖ ≤ tol · max(1, ‖y_{k+1}‖)`.
    pub tol: f64,
}

impl Default for FdpgConfig {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            step_l: None,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FdpgResult {
    /// The last computed primal `u_k`.
    pub x: Vec<f64>,
    /// The last dual iterate `y_k`.
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Iteration state. Exposed so callers can continue from a converged point.
#[derive(Clone, Debug)]
pub struct Fdpg<'a> {
    matrix: &'a DenseMatrix,
    set: &'a ConvexSet,
    kernel: Kernel,
    step_l: f64,
    y: Vec<f64>,
    w: Vec<f64>,
    t: f64,
    u: Vec<f64>,
    iterations: usize,
}

impl<'a> Fdpg<'a> {
    pub fn new(
        matrix: &'a DenseMatrix,
        set: &'a ConvexSet,
        kernel: Kernel,
        step_l: Option<f64>,
    ) -> Result<Self> {
        check_dim(matrix.rows(), set.dim())?;
        let step_l = match step_l {
            Some(l) => l,
            None => spectral_norm_sq(matrix)? * LIPSCHITZ_INFLATION / kernel.mu(),
        };
        if !(step_l > 0.0) || !step_l.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "FDPG step constant must be positive, got {step_l}"
            )));
        }
        let m = matrix.rows();
        let u = kernel.mirror_map(&vec![0.0; matrix.cols()]);
        Ok(Self {
            matrix,
            set,
            kernel,
            step_l,
            y: vec![0.0; m],
            w: vec![0.0; m],
            t: 1.0,
            u,
            iterations: 0,
        })
    }

    pub fn step_l(&self) -> f64 {
        self.step_l
    }

    pub fn primal(&self) -> &[f64] {
        &self.u
    }

    pub fn dual(&self) -> &[f64] {
        &self.y
    }

    /// One FDPG update; returns `‖y_{k+1} − y_k‖`.
    pub fn step(&mut self) -> Result<f64> {
        let l = self.step_l;
        self.u = self.kernel.mirror_map(&self.matrix.tr_mul_vec(&self.w)?);
        let au = self.matrix.mul_vec(&self.u)?;
        let shifted: Vec<f64> = au.iter().zip(&self.w).map(|(a, w)| a - l * w).collect();
        let p = self.set.project(&shifted)?;
        let y_next: Vec<f64> = self
            .w
            .iter()
            .zip(au.iter().zip(&p))
            .map(|(w, (a, pi))| w - a / l + pi / l)
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt());
        let momentum = (self.t - 1.0) / t_next;
        let moved = dist2(&y_next, &self.y);
        self.w = y_next
            .iter()
            .zip(&self.y)
            .map(|(yn, y)| yn + momentum * (yn - y))
            .collect();
        self.y = y_next;
        self.t = t_next;
        self.iterations += 1;
        if !moved.is_finite() {
            return Err(Error::NonFinite("FDPG dual iterate"));
        }
        Ok(moved)
    }

    pub fn run(mut self, max_iters: usize, tol: f64) -> Result<FdpgResult> {
        let mut converged = false;
        for _ in 0..max_iters {
            let moved = self.step()?;
            if moved <= tol * rel_scale(&[norm2(&self.y)]) {
                converged = true;
                break;
            }
        }
        Ok(FdpgResult {
            x: self.u,
            dual: self.y,
            iterations: self.iterations,
            converged,
        })
    }
}

pub fn fdpg_solve(
    matrix: &DenseMatrix,
    set: &ConvexSet,
    kernel: &Kernel,
    config: &FdpgConfig,
) -> Result<FdpgResult> {
    if config.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    Fdpg::new(matrix, set, *kernel, config.step_l)?.run(config.max_iters, config.tol)
}
