//! Cut-and-project linearized Bregman solvers for bilevel convex problems
//!
//! ```text
//! minimize ω(x)  over  x ∈ argmin f
//! ```
//!
//! with `ω` strongly convex ([`Kernel`]) and `f` smooth convex
//! ([`InnerObjective`]). Each iteration cuts away the current point with a
//! halfspace that contains every minimizer of `f` and takes a Bregman
//! projection (or a relaxed step) toward it; with the elastic-net kernel and
//! least squares this is the linearized Bregman iteration for sparse recovery.
//!
//! - [`kernels`], [`bregman`]: kernels, conjugates, Bregman distances.
//! - [`objectives`], [`cuts`]: inner objectives, constraint sets, cutting halfspaces.
//! - [`stepsize`], [`solver`]: exact / constant / dynamic steps and the main loop.
//! - [`baseline`]: FDPG reference solver for the constrained problem.
//! - [`harness`]: instance generation, metrics, oracles, rate fits, traces.
//!
//! ```
//! use bregcut::{harness, solve, SolverConfig, StepSizeRule};
//!
//! let p = harness::generate_instance(20, 40, 3, harness::NoiseKind::None, 0.0, 1).unwrap();
//! let obj = p.objective(harness::ConstraintKind::Point).unwrap();
//! let cfg = SolverConfig::new(StepSizeRule::Exact).max_iters(5000).grad_tol(1e-8);
//! let res = solve(&p.kernel(), &obj, &cfg, &vec![0.0; 40], None).unwrap();
//! assert!(res.trace.last().unwrap().feas < 1e-6);
//! ```
// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bregman;
pub mod cuts;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod objectives;
pub mod solver;
pub mod stepsize;

pub use baseline::{fdpg_solve, Fdpg, FdpgConfig, FdpgResult};
pub use bregman::{
    bregman_distance, check_projection_vi, three_point_residual, PrimalDualPair, Tolerances,
};
pub use cuts::{build_halfspace, Halfspace};
pub use error::{Error, Result};
pub use kernels::{soft_shrink, Kernel};
pub use linalg::DenseMatrix;
pub use objectives::{spectral_norm_sq, ConvexSet, InnerObjective};
pub use solver::{solve, step, IterationRecord, SolveResult, SolverConfig};
pub use stepsize::{dual_derivative, dual_objective, dynamic_step, exact_step, StepSizeRule};
