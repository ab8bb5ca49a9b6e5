use serde::{Deserialize, Serialize};

use crate::error::{fmt_roots, Error, Result};
use crate::lti::{c2d_zoh, stability_check_ct, stability_check_dt, CtTransferFunction, DtTransferFunction};
use crate::theta::ThetaVector;
use crate::{CtPoly, CtTf, DtTf};

/// Feedback controller: continuous `C(p)` (setting 1) or discrete `C_d(q)`
/// acting through a zero-order hold (setting 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Controller {
    Continuous(CtTf),
    Discrete(DtTf),
}

/// Which closed loop generates the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Setting {
    /// Continuous controller; only sampled data are measured.
    Continuous = 1,
    /// Discrete controller with ZOH actuation.
    Hybrid = 2,
}

impl TryFrom<u8> for Setting {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Setting::Continuous),
            2 => Ok(Setting::Hybrid),
            _ => Err(format!("setting must be 1 or 2, got {v}")),
        }
    }
}

impl From<Setting> for u8 {
    fn from(s: Setting) -> u8 {
        s as u8
    }
}

/// Complete description of one closed-loop data-generating experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub setting: Setting,
    pub plant: CtTf,
    pub controller: Controller,
    /// Output sample period in seconds.
    pub h: f64,
    /// Number of slow-rate samples.
    pub n_samples: usize,
    pub sigma_r2: f64,
    pub sigma_v2: f64,
    /// Log the plant input on a grid `M` times finer than `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample_m: Option<usize>,
    pub seed: u64,
    /// Discrete shaping filter for coloured output noise, applied to white
    /// noise of variance `sigma_v2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_filter: Option<DtTf>,
}

impl ScenarioConfig {
    /// Checks every precondition of the simulators, including closed-loop
    /// stability of the true loop.
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Config("sample period h must be positive".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if !(self.sigma_r2 >= 0.0) || !(self.sigma_v2 >= 0.0) {
            return Err(Error::Config("variances must be non-negative".into()));
        }
        if self.oversample_m == Some(0) {
            return Err(Error::Config("oversample_m must be at least 1".into()));
        }
        stability_check_ct(self.plant.den()).require("plant")?;
        if let Some(f) = &self.noise_filter {
            check_period(f.sample_period(), self.h, "noise filter")?;
            stability_check_dt(f).require("noise shaping filter")?;
        }
        match (&self.setting, &self.controller) {
            (Setting::Continuous, Controller::Continuous(c)) => {
                let chr = CtTransferFunction::loop_characteristic(&self.plant, c);
                let rep = stability_check_ct(&chr);
                if !rep.stable {
                    return Err(Error::ClosedLoopUnstable {
                        setting: "setting 1, zeros of 1 + G(p)C(p) must lie in the open left half plane".into(),
                        roots: fmt_roots(&rep.unstable_roots),
                    });
                }
            }
            (Setting::Hybrid, Controller::Discrete(c)) => {
                check_period(c.sample_period(), self.h, "controller")?;
                let gd = c2d_zoh(&self.plant, self.h)?;
                let chr = DtTransferFunction::loop_characteristic(&gd, c);
                let rep = crate::lti::stability_check(&chr, crate::lti::StabilityDomain::Discrete);
                if !rep.stable {
                    return Err(Error::ClosedLoopUnstable {
                        setting: "setting 2, zeros of 1 + G_d(q)C_d(q) must lie in the open unit disk".into(),
                        roots: fmt_roots(&rep.unstable_roots),
                    });
                }
            }
            _ => {
                return Err(Error::Config(
                    "setting 1 needs a continuous controller and setting 2 a discrete one".into(),
                ))
            }
        }
        Ok(())
    }

    pub fn continuous_controller(&self) -> Option<&CtTf> {
        match &self.controller {
            Controller::Continuous(c) => Some(c),
            Controller::Discrete(_) => None,
        }
    }

    pub fn discrete_controller(&self) -> Option<&DtTf> {
        match &self.controller {
            Controller::Discrete(c) => Some(c),
            Controller::Continuous(_) => None,
        }
    }

    /// ZOH equivalent of the plant at the scenario's sample period.
    pub fn plant_zoh(&self) -> Result<DtTf> {
        c2d_zoh(&self.plant, self.h)
    }

    /// True parameter vector at the plant's own orders.
    pub fn true_theta(&self) -> Result<ThetaVector> {
        ThetaVector::from_tf(&self.plant, self.plant.den().degree(), self.plant.num().degree())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn with_samples(&self, n_samples: usize) -> Self {
        ScenarioConfig {
            n_samples,
            ..self.clone()
        }
    }

    /// Same scenario with the output disturbance switched off.
    pub fn noise_free(&self) -> Self {
        ScenarioConfig {
            sigma_v2: 0.0,
            ..self.clone()
        }
    }

    /// Closed-loop characteristic polynomial (continuous or in `q`).
    pub fn loop_polynomial(&self) -> Result<CtPoly> {
        match &self.controller {
            Controller::Continuous(c) => Ok(CtTransferFunction::loop_characteristic(&self.plant, c)),
            Controller::Discrete(c) => Ok(DtTransferFunction::loop_characteristic(&self.plant_zoh()?, c)),
        }
    }
}

fn check_period(a: f64, b: f64, what: &str) -> Result<()> {
    if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
        return Err(Error::Config(format!(
            "{what} sample period {a} differs from the scenario period {b}"
        )));
    }
    Ok(())
}
