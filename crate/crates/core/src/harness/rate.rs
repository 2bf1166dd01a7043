//! Log-linear rate fits on trace columns.

use crate::error::{Error, Result};
use crate::solver::IterationRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceColumn {
    StepSize,
    GradNorm,
    FVal,
    OmegaVal,
    Feas,
    ReconErr,
    BregmanToFeasible,
}

impl TraceColumn {
    pub fn name(&self) -> &'static str {
        match self {
            TraceColumn::StepSize => "t_k",
            TraceColumn::GradNorm => "grad_norm",
            TraceColumn::FVal => "f_val",
            TraceColumn::OmegaVal => "omega_val",
            TraceColumn::Feas => "feas",
            TraceColumn::ReconErr => "recon_err",
            TraceColumn::BregmanToFeasible => "bregman_to_feasible",
        }
    }

    pub fn get(&self, r: &IterationRecord) -> Option<f64> {
        match self {
            TraceColumn::StepSize => Some(r.t_k),
            TraceColumn::GradNorm => Some(r.grad_norm),
            TraceColumn::FVal => Some(r.f_val),
            TraceColumn::OmegaVal => Some(r.omega_val),
            TraceColumn::Feas => Some(r.feas),
            TraceColumn::ReconErr => r.recon_err,
            TraceColumn::BregmanToFeasible => r.bregman_to_feasible,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    /// Slope of `ln(value)` against `k`; negative for geometric decay.
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl RateFit {
    /// Per-iteration contraction factor `exp(slope)`.
    pub fn factor(&self) -> f64 {
        self.slope.exp()
    }
}

/// Ordinary least squares of `ln(value_k)` on `k` for records with
/// `start ≤ k ≤ end`. A column that is exactly log-linear (including
/// constant) has `r² = 1`.
pub fn fit_linear_rate(
    trace: &[IterationRecord],
    column: TraceColumn,
    window: (usize, usize),
) -> Result<RateFit> {
    let (start, end) = window;
    let mut pts = Vec::new();
    for r in trace.iter().filter(|r| r.k >= start && r.k <= end) {
        match column.get(r) {
            Some(v) if v > 0.0 && v.is_finite() => pts.push((r.k as f64, v.ln())),
            _ => return Err(Error::InvalidTraceWindow(column.name().into())),
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidTraceWindow(column.name().into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let r_squared = if syy <= 1e-30 * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        r_squared,
        points: pts.len(),
    })
}
