//! Refined instrumental-variable estimators for continuous-time models
//! from closed-loop sampled data.
//!
//! Every estimate starts from a state-variable-filter least-squares fit and
//! then iterates: with the current model `B_j/A_j`, the output and input are
//! prefiltered by `1/A_j(p)`, an instrument is formed from noise-free
//! surrogates of the regressor, and the parameters are re-solved from the
//! modified normal equations. The instrument differs by method:
//!
//! * SRIVC filters the measured input through `-p^i B_j/A_j^2`.
//! * CLSRIVC first passes the reference through the estimated control
//!   sensitivity, continuous (`C(p)` known) or discrete (`C_d(q)` known).
//!
//! The `-os` variants read the input on a fast grid so the intersample
//! behaviour of `u(t)` no longer has to be assumed.

mod config;
mod diagnostics;
mod estimate;
mod ivstep;
mod projection;
mod signals;

pub use config::{EstimatorConfig, InstrumentSpec, InstrumentVariant, Method, StabilityProjection};
pub use diagnostics::{epsilon_r_bound, normal_matrix_diagnostics, NormalMatrixDiagnostics};
pub use estimate::{
    estimate, estimate_from, EstimationResult, IterationDiagnostics, StopReason, DIVERGENCE_FACTOR,
};
pub use ivstep::{condition_number, default_svf_cutoff, iv_step, iv_step_from, lssvf_init, IvSolution, MAX_CONDITION};
pub use projection::project_stable;
pub use signals::{build_instrument, build_regressor, FilteredRegressor, Instrument};
