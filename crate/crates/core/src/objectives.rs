//! Smooth convex inner objectives `f` and the convex sets they measure
//! distance to.
//!
//! Both kinds have the form `f(x) = ½‖r(x)‖²` with residual
//! `r(x) = Ax − P_Q(Ax)`; for least squares `Q = {b}` and `r(x) = Ax − b`.
//! The gradient is `Aᵀ r(x)` and its Lipschitz constant is `‖AᵀA‖₂`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, ensure_finite, norm2, sub, DenseMatrix};

/// Inflation applied to the power-iteration estimate before it is cached as `L`.
pub const LIPSCHITZ_INFLATION: f64 = 1.0 + 1e-9;

const POWER_MAX_ITERS: usize = 10_000;
const POWER_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    Point(Vec<f64>),
    /// `{y : ‖y − center‖₂ ≤ radius}`
    L2Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{y : ‖y − center‖∞ ≤ radius}`
    LinfBox {
        center: Vec<f64>,
        radius: f64,
    },
}

impl ConvexSet {
    pub fn l2_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        ensure_finite(&center, "ball center")?;
        Ok(ConvexSet::L2Ball { center, radius })
    }

    pub fn linf_box(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        ensure_finite(&center, "box center")?;
        Ok(ConvexSet::LinfBox { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        match self {
            ConvexSet::Point(b) => b,
            ConvexSet::L2Ball { center, .. } | ConvexSet::LinfBox { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y.len())?;
        Ok(match self {
            ConvexSet::Point(b) => b.clone(),
            ConvexSet::L2Ball { center, radius } => {
                let d = sub(y, center);
                let nd = norm2(&d);
                if nd <= *radius {
                    y.to_vec()
                } else {
                    let s = radius / nd;
                    center.iter().zip(&d).map(|(c, di)| c + s * di).collect()
                }
            }
            ConvexSet::LinfBox { center, radius } => center
                .iter()
                .zip(y)
                .map(|(c, yi)| c + (yi - c).clamp(-radius, *radius))
                .collect(),
        })
    }

    /// `y − P_Q(y)`
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(y)?;
        Ok(sub(y, &p))
    }

    /// Euclidean distance from `y` to the set.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        Ok(norm2(&self.residual(y)?))
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius >= 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "set radius must be finite and nonnegative, got {radius}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveKind {
    /// `½‖Ax − b‖²`
    LeastSquares { b: Vec<f64> },
    /// `½ dist²(Ax, Q)`
    DistSq { set: ConvexSet },
}

/// Residual, value and gradient of `f` at one point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub residual: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct InnerObjective {
    matrix: DenseMatrix,
    kind: ObjectiveKind,
    lipschitz: f64,
}

impl InnerObjective {
    pub fn least_squares(matrix: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        check_dim(matrix.rows(), b.len())?;
        ensure_finite(&b, "right-hand side")?;
        Self::build(matrix, ObjectiveKind::LeastSquares { b })
    }

    pub fn dist_sq(matrix: DenseMatrix, set: ConvexSet) -> Result<Self> {
        check_dim(matrix.rows(), set.dim())?;
        Self::build(matrix, ObjectiveKind::DistSq { set })
    }

    fn build(matrix: DenseMatrix, kind: ObjectiveKind) -> Result<Self> {
        let lipschitz = spectral_norm_sq(&matrix)? * LIPSCHITZ_INFLATION;
        Ok(Self {
            matrix,
            kind,
            lipschitz,
        })
    }

    /// Replaces the cached Lipschitz constant. The caller is responsible for
    /// `L ≥ ‖AᵀA‖₂`.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `b` for least squares, the set center otherwise.
    pub fn target(&self) -> &[f64] {
        match &self.kind {
            ObjectiveKind::LeastSquares { b } => b,
            ObjectiveKind::DistSq { set } => set.center(),
        }
    }

    /// `‖Aᵀ b‖`, the scale used for default stopping thresholds.
    pub fn data_scale(&self) -> f64 {
        self.matrix
            .tr_mul_vec(self.target())
            .map(|g| norm2(&g))
            .unwrap_or(0.0)
    }

    /// `r(x)` maps `x` into the data space.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.matrix.mul_vec(x)?;
        match &self.kind {
            ObjectiveKind::LeastSquares { b } => Ok(sub(&ax, b)),
            ObjectiveKind::DistSq { set } => set.residual(&ax),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * dot(&r, &r))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.residual(x)?;
        self.matrix.tr_mul_vec(&r)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let residual = self.residual(x)?;
        let value = 0.5 * dot(&residual, &residual);
        let gradient = self.matrix.tr_mul_vec(&residual)?;
        Ok(Evaluation {
            residual,
            value,
            gradient,
        })
    }
}

/// `‖AᵀA‖₂ = σ_max(A)²` by power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector. If that start lies in the
/// null space of `A`, a ramp and then the coordinate vectors are tried in
/// turn.
pub fn spectral_norm_sq(a: &DenseMatrix) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let n = a.cols();
    let starts = std::iter::once(vec![1.0; n])
        .chain(std::iter::once((1..=n).map(|i| i as f64).collect()))
        .chain((0..n).map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        }));
    for start in starts {
        if let Some(est) = power_iteration(a, start)? {
            return Ok(est);
        }
    }
    Err(Error::ZeroMatrix)
}

fn power_iteration(a: &DenseMatrix, mut v: Vec<f64>) -> Result<Option<f64>> {
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut rayleigh = 0.0_f64;
    for _ in 0..POWER_MAX_ITERS {
        let av = a.mul_vec(&v)?;
        let w = a.tr_mul_vec(&av)?;
        let next = dot(&av, &av);
        let nw = norm2(&w);
        if nw == 0.0 || next == 0.0 {
            return Ok(None);
        }
        let change = (next - rayleigh).abs();
        rayleigh = next;
        v = w.into_iter().map(|x| x / nw).collect();
        if change <= POWER_REL_TOL * rayleigh {
            break;
        }
    }
    Ok(Some(rayleigh))
}
