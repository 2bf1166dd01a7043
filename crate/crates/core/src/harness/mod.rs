//! Experiment reproduction: instance generation, metrics, oracles, rate fits
//! and trace serialization.

pub mod checks;
pub mod instance;
pub mod metrics;
pub mod oracle;
pub mod rate;
pub mod rng;
pub mod trace_io;

pub use instance::{generate_instance, ConstraintKind, NoiseKind, ProblemInstance};
pub use metrics::{metrics, smooth_kernel_bounds, sublinear_bounds, Metrics};
pub use oracle::{feasible_horizon, oracle_bregman_projection};
pub use rate::{fit_linear_rate, RateFit, TraceColumn};
pub use rng::SplitMix64;
pub use trace_io::{read_trace_csv, write_trace_csv, TRACE_HEADER};
