//! Continuous-time filters applied to sampled signals under an explicit
//! hold assumption, derivative banks, and oversampled-input filtering.
//!
//! All filters start from rest.

mod bank;
mod fast;
mod filter;
mod signal;

pub use bank::{derivative_bank, DerivativeBankOutput};
pub use fast::{check_alignment, derivative_bank_fast, filter_fast_then_sample};
pub use filter::{filter_sampled, HoldType};
pub use signal::{SampledSignal, GRID_JITTER_TOL};

pub(crate) use signal::uniform_grid;
