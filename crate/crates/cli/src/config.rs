//! The configuration file schema and its merge with command-line flags.
//!
//! Every value resolves as: command-line flag, else config file, else the
//! built-in default listed in [`CONFIG_KEYS`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use srivc::estim::{EstimatorConfig, Method, StabilityProjection};
use srivc::sim::ScenarioConfig;
use srivc::{presets, Error, Result};

/// Keys accepted in a config file, with their defaults. Printed by `--help`.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("preset", "named scenario: paper-setting1 | paper-setting2 | paper-bias (default paper-setting2)"),
    ("scenario", "full scenario table (setting, plant, controller, h, ...); replaces the preset"),
    ("n_samples", "number of output samples N (default: preset value)"),
    ("sigma_r2", "reference variance (default: preset value)"),
    ("sigma_v2", "disturbance variance (default: preset value)"),
    ("oversample_m", "fast input grid factor M, 0 disables (default: preset value)"),
    ("noise_pole", "pole of a first-order noise shaping filter q/(q - pole) (default: white noise)"),
    ("seed", "simulation seed or sweep master seed (default 1)"),
    ("method", "srivc | clsrivc (default srivc)"),
    ("oversampled", "use the fast input track, the -os variants (default false)"),
    ("n", "denominator order (default: plant order)"),
    ("m", "numerator order (default: plant order)"),
    ("max_iter", "iteration cap (default 200)"),
    ("rel_tol", "relative-change stopping tolerance (default 1e-7)"),
    ("stability_projection", "reflect | abort (default reflect)"),
    ("svf_cutoff", "LSSVF cutoff in rad/s (default: from the output autocorrelation)"),
    ("discard", "leading samples excluded from the sample averages (default 0)"),
    ("runs", "Monte Carlo runs per grid point (default 300)"),
    ("sample_sizes", "sweep sample sizes, ascending (default 40 log-spaced values 200..200000)"),
    ("snr_points", "number of log-spaced SNR values in 1e-3..1e3 (default 40)"),
    ("jobs", "worker threads (default: available cores)"),
];

/// Contents of a TOML or JSON config file. All fields are optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub scenario: Option<ScenarioConfig>,
    pub n_samples: Option<usize>,
    pub sigma_r2: Option<f64>,
    pub sigma_v2: Option<f64>,
    pub oversample_m: Option<usize>,
    pub noise_pole: Option<f64>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub oversampled: Option<bool>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub max_iter: Option<usize>,
    pub rel_tol: Option<f64>,
    pub stability_projection: Option<StabilityProjection>,
    pub svf_cutoff: Option<f64>,
    pub discard: Option<usize>,
    pub runs: Option<usize>,
    pub sample_sizes: Option<Vec<usize>>,
    pub snr_points: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, e))
        }
    }

    /// Field-wise `self` unless unset, then `lower`.
    pub fn over(self, lower: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: self.$f.or(lower.$f)),* } };
        }
        pick!(
            preset, scenario, n_samples, sigma_r2, sigma_v2, oversample_m, noise_pole, seed, method, oversampled, n, m,
            max_iter, rel_tol, stability_projection, svf_cutoff, discard, runs, sample_sizes, snr_points, jobs
        )
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn runs(&self) -> usize {
        self.runs.unwrap_or(300)
    }

    pub fn method(&self) -> Result<Method> {
        match &self.method {
            None => Ok(Method::Srivc),
            Some(s) => s.parse(),
        }
    }

    /// The scenario after applying preset, explicit table and overrides.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let mut sc = match (&self.scenario, &self.preset) {
            (Some(s), _) => s.clone(),
            (None, Some(name)) => presets::by_name(name).ok_or_else(|| {
                Error::Config(format!("unknown preset {name:?}; expected one of {}", presets::NAMES.join(", ")))
            })?,
            (None, None) => presets::paper_setting2(),
        };
        if let Some(n) = self.n_samples {
            sc.n_samples = n;
        }
        if let Some(v) = self.sigma_r2 {
            sc.sigma_r2 = v;
        }
        if let Some(v) = self.sigma_v2 {
            sc.sigma_v2 = v;
        }
        if let Some(m) = self.oversample_m {
            sc.oversample_m = (m > 0).then_some(m);
        }
        if let Some(p) = self.noise_pole {
            sc.noise_filter = Some(presets::first_order_noise(p, sc.h)?);
        }
        sc.seed = self.seed();
        sc.validate()?;
        Ok(sc)
    }

    pub fn estimator(&self, plant_orders: (usize, usize)) -> Result<EstimatorConfig> {
        let mut cfg = EstimatorConfig::new(
            self.method()?,
            self.n.unwrap_or(plant_orders.0),
            self.m.unwrap_or(plant_orders.1),
        )
        .oversampled(self.oversampled.unwrap_or(false));
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.stability_projection {
            cfg.stability_projection = v;
        }
        cfg.svf_cutoff = self.svf_cutoff;
        if let Some(v) = self.discard {
            cfg.discard = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
