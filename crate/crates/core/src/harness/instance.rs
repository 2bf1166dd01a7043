//! Planted sparse-recovery instances and their JSON problem files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{
    add, dist2, ensure_finite, norm1, norm2, norm_inf, rel_scale, sub, DenseMatrix,
};
use crate::objectives::{ConvexSet, InnerObjective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    /// i.i.d. standard normal; radius measured in ℓ₂.
    Gaussian,
    /// i.i.d. uniform on `[−1, 1]`; radius measured in ℓ∞.
    Uniform,
}

impl NoiseKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(NoiseKind::None),
            "gaussian" => Some(NoiseKind::Gaussian),
            "uniform" => Some(NoiseKind::Uniform),
            _ => None,
        }
    }
}

/// Which constraint set the inner objective measures distance to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `Ax = b^σ`
    Point,
    /// `‖Ax − b^σ‖₂ ≤ σ`
    L2Ball,
    /// `‖Ax − b^σ‖∞ ≤ σ`
    LinfBox,
}

impl ConstraintKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "point" => Some(ConstraintKind::Point),
            "l2ball" => Some(ConstraintKind::L2Ball),
            "linfbox" => Some(ConstraintKind::LinfBox),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub x_true: Vec<f64>,
    pub b_clean: Vec<f64>,
    pub b_obs: Vec<f64>,
    pub noise: NoiseKind,
    pub noise_scale: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub seed: u64,
}

/// Draws an instance. Order of draws from the seeded stream: the entries of
/// `A` row by row; the support by partial Fisher–Yates; for each support
/// position a sign then a magnitude `1 + |N(0,1)|`; finally the noise.
///
/// `σ = c·‖b^σ − b‖` in the norm matching the noise kind, while `b^σ` keeps
/// the full noise; `λ = ‖x†‖₁`.
pub fn generate_instance(
    m: usize,
    n: usize,
    sparsity: usize,
    noise: NoiseKind,
    noise_scale: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be positive, got {m}x{n}"
        )));
    }
    if sparsity == 0 || sparsity > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity must be in 1..={n}, got {sparsity}"
        )));
    }
    if !(noise_scale >= 0.0) || !noise_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be nonnegative, got {noise_scale}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let a = DenseMatrix::new(m, n, rng.normal_vec(m * n))?;

    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..sparsity {
        let j = i + rng.index(n - i);
        idx.swap(i, j);
    }
    let mut x_true = vec![0.0; n];
    for &pos in &idx[..sparsity] {
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        x_true[pos] = sign * (1.0 + rng.normal().abs());
    }
    let b_clean = a.mul_vec(&x_true)?;

    let (b_obs, sigma) = match noise {
        NoiseKind::None => (b_clean.clone(), 0.0),
        NoiseKind::Gaussian => {
            let e = rng.normal_vec(m);
            (add(&b_clean, &e), noise_scale * norm2(&e))
        }
        NoiseKind::Uniform => {
            let e: Vec<f64> = (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            (add(&b_clean, &e), noise_scale * norm_inf(&e))
        }
    };
    let lambda = norm1(&x_true);
    Ok(ProblemInstance {
        a,
        x_true,
        b_clean,
        b_obs,
        noise,
        noise_scale: if noise == NoiseKind::None {
            0.0
        } else {
            noise_scale
        },
        sigma,
        lambda,
        seed,
    })
}

impl ProblemInstance {
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::ElasticNet {
            lambda: self.lambda,
        }
    }

    pub fn constraint(&self, kind: ConstraintKind) -> Result<ConvexSet> {
        match kind {
            ConstraintKind::Point => Ok(ConvexSet::Point(self.b_obs.clone())),
            ConstraintKind::L2Ball => ConvexSet::l2_ball(self.b_obs.clone(), self.sigma),
            ConstraintKind::LinfBox => ConvexSet::linf_box(self.b_obs.clone(), self.sigma),
        }
    }

    /// Least squares for the point constraint, squared distance otherwise.
    pub fn objective(&self, kind: ConstraintKind) -> Result<InnerObjective> {
        match kind {
            ConstraintKind::Point => {
                InnerObjective::least_squares(self.a.clone(), self.b_obs.clone())
            }
            _ => InnerObjective::dist_sq(self.a.clone(), self.constraint(kind)?),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ProblemFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Wire form of a problem file.
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    m: usize,
    n: usize,
    seed: u64,
    lambda: f64,
    sigma: f64,
    noise_kind: NoiseKind,
    #[serde(default = "default_scale")]
    noise_scale: f64,
    #[serde(rename = "A")]
    a: Vec<f64>,
    x_true: Vec<f64>,
    b_clean: Vec<f64>,
    b_obs: Vec<f64>,
}

fn default_scale() -> f64 {
    1.0
}

impl From<&ProblemInstance> for ProblemFile {
    fn from(p: &ProblemInstance) -> Self {
        Self {
            m: p.m(),
            n: p.n(),
            seed: p.seed,
            lambda: p.lambda,
            sigma: p.sigma,
            noise_kind: p.noise,
            noise_scale: p.noise_scale,
            a: p.a.data().to_vec(),
            x_true: p.x_true.clone(),
            b_clean: p.b_clean.clone(),
            b_obs: p.b_obs.clone(),
        }
    }
}

impl TryFrom<ProblemFile> for ProblemInstance {
    type Error = Error;

    fn try_from(f: ProblemFile) -> Result<Self> {
        let a = DenseMatrix::new(f.m, f.n, f.a)?;
        check_dim(f.n, f.x_true.len())?;
        check_dim(f.m, f.b_clean.len())?;
        check_dim(f.m, f.b_obs.len())?;
        ensure_finite(&f.x_true, "x_true")?;
        ensure_finite(&f.b_clean, "b_clean")?;
        ensure_finite(&f.b_obs, "b_obs")?;
        if !(f.lambda >= 0.0) || !(f.sigma >= 0.0) {
            return Err(Error::InvalidParameter(
                "lambda and sigma must be nonnegative".into(),
            ));
        }
        let ax = a.mul_vec(&f.x_true)?;
        if dist2(&ax, &f.b_clean) > 1e-12 * rel_scale(&[norm2(&f.b_clean)]) {
            return Err(Error::InvalidParameter(
                "b_clean does not equal A·x_true".into(),
            ));
        }
        Ok(Self {
            a,
            x_true: f.x_true,
            b_clean: f.b_clean,
            b_obs: f.b_obs,
            noise: f.noise_kind,
            noise_scale: f.noise_scale,
            sigma: f.sigma,
            lambda: f.lambda,
            seed: f.seed,
        })
    }
}

/// Noise vector actually added to the data.
pub fn noise_vector(p: &ProblemInstance) -> Vec<f64> {
    sub(&p.b_obs, &p.b_clean)
}
