//! Closed-loop data generation for both experimental settings.

mod excitation;
mod record;
mod rng;
mod scenario;
mod setting1;
mod setting2;

pub use excitation::{excitation_order, ExcitationReport, EXCITATION_TOL};
pub use record::{RecordMeta, SampledRecord};
pub use rng::{derive_seed, GaussianStream};
pub use scenario::{Controller, ScenarioConfig, Setting};
pub use setting1::{simulate_setting1, simulate_setting1_substeps};
pub use setting2::simulate_setting2;

use crate::error::Result;


/// Dispatches on the scenario's setting.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SampledRecord> {
    match cfg.setting {
        Setting::Continuous => simulate_setting1(cfg),
        Setting::Hybrid => simulate_setting2(cfg),
    }
}

fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Output signal-to-noise ratio in dB: variance of the measured output over
/// the variance of the disturbance `v` that enters it.
pub fn output_snr_db(cfg: &ScenarioConfig) -> Result<f64> {
    let rec = simulate(cfg)?;
    Ok(record_snr_db(&rec))
}

/// As [`output_snr_db`] for an existing synthetic record; `NaN` when the
/// disturbance track is not available.
pub fn record_snr_db(rec: &SampledRecord) -> f64 {
    match &rec.v {
        Some(v) => 10.0 * (variance(rec.y.values()) / variance(v)).log10(),
        None => f64::NAN,
    }
}
