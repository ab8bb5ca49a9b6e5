//! The systems, controllers and signal levels of the reference experiments.

use crate::sim::{Controller, ScenarioConfig, Setting};
use crate::{CtTf, DtTf};

/// Second-order non-minimum-phase plant `(-0.25p + 0.5) / (0.5p^2 + 0.707p + 1)`.
pub fn consistency_plant() -> CtTf {
    CtTf::from_f64(&[0.5, -0.25], &[1.0, 0.707, 0.5]).expect("valid plant")
}

/// PI controller `1.896e-4 + 0.7278 / p` for the continuous loop.
pub fn setting1_controller() -> CtTf {
    CtTf::from_f64(&[0.7278, 1.896e-4], &[0.0, 1.0]).expect("valid controller")
}

/// `0.416 (q - 0.7452) / (q - 1)`.
pub fn setting2_controller(h: f64) -> DtTf {
    DtTf::from_f64(&[0.416, -0.416 * 0.7452], &[1.0, -1.0], h).expect("valid controller")
}

pub fn paper_setting1() -> ScenarioConfig {
    ScenarioConfig {
        setting: Setting::Continuous,
        plant: consistency_plant(),
        controller: Controller::Continuous(setting1_controller()),
        h: 0.1,
        n_samples: 200_000,
        sigma_r2: 1.0,
        sigma_v2: 0.01,
        oversample_m: Some(100),
        seed: 1,
        noise_filter: None,
    }
}

pub fn paper_setting2() -> ScenarioConfig {
    ScenarioConfig {
        setting: Setting::Hybrid,
        plant: consistency_plant(),
        controller: Controller::Discrete(setting2_controller(0.1)),
        h: 0.1,
        n_samples: 200_000,
        sigma_r2: 1.0,
        sigma_v2: 0.01,
        oversample_m: None,
        seed: 1,
        noise_filter: None,
    }
}

/// Biproper loop of the bias study: `G = (-0.3p + 1)/(p + 1)` with
/// `C_d = 2.15 (q - 0.9949)/(q - 1)`. The reference has unit variance and
/// the disturbance variance is `1 / snr`.
pub fn paper_bias(snr: f64) -> ScenarioConfig {
    let h = 0.1;
    ScenarioConfig {
        setting: Setting::Hybrid,
        plant: bias_plant(),
        controller: Controller::Discrete(
            DtTf::from_f64(&[2.15, -2.15 * 0.9949], &[1.0, -1.0], h).expect("valid controller"),
        ),
        h,
        n_samples: 100_000,
        sigma_r2: 1.0,
        sigma_v2: 1.0 / snr,
        oversample_m: None,
        seed: 1,
        noise_filter: None,
    }
}

/// `(-0.3p + 1)/(p + 1)`, the plant of [`paper_bias`].
pub fn bias_plant() -> CtTf {
    CtTf::from_f64(&[1.0, -0.3], &[1.0, 1.0]).expect("valid plant")
}

/// Looks a preset up by its command-line name.
pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    match name {
        "paper-setting1" => Some(paper_setting1()),
        "paper-setting2" => Some(paper_setting2()),
        "paper-bias" => Some(paper_bias(1.0)),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["paper-setting1", "paper-setting2", "paper-bias"];

/// First-order noise shaping filter `q / (q - pole)`, i.e. `1/(1 - pole q^-1)`.
pub fn first_order_noise(pole: f64, h: f64) -> crate::Result<DtTf> {
    DtTf::from_f64(&[1.0, 0.0], &[1.0, -pole], h)
}
