use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::HoldType;
use crate::sim::{Controller, SampledRecord, ScenarioConfig, Setting};
use crate::{CtTf, DtTf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Srivc,
    Clsrivc,
}

impl Method {
    pub fn label(self, oversampled: bool) -> &'static str {
        match (self, oversampled) {
            (Method::Srivc, false) => "SRIVC",
            (Method::Srivc, true) => "SRIVC-os",
            (Method::Clsrivc, false) => "CLSRIVC",
            (Method::Clsrivc, true) => "CLSRIVC-os",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srivc" => Ok(Method::Srivc),
            "clsrivc" => Ok(Method::Clsrivc),
            other => Err(Error::Config(format!("unknown method {other:?} (expected srivc or clsrivc)"))),
        }
    }
}

/// What to do when an iterate yields an unstable prefilter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityProjection {
    /// Mirror offending roots into the stable region and continue.
    #[default]
    Reflect,
    /// Fail with the violated assumption.
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub method: Method,
    /// Which loop produced the data; inferred from the instrument when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting_hint: Option<Setting>,
    /// Use the fast input track in regressor and instrument.
    pub oversampled: bool,
    pub n: usize,
    pub m: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub hold: HoldType,
    pub stability_projection: StabilityProjection,
    /// State-variable-filter bandwidth (rad/s) for the initial estimate;
    /// estimated from the data when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svf_cutoff: Option<f64>,
    /// Leading samples left out of every sample average (filter transients).
    pub discard: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: Method::Srivc,
            setting_hint: None,
            oversampled: false,
            n: 2,
            m: 1,
            max_iter: 200,
            rel_tol: 1e-7,
            hold: HoldType::Zoh,
            stability_projection: StabilityProjection::Reflect,
            svf_cutoff: None,
            discard: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn new(method: Method, n: usize, m: usize) -> Self {
        EstimatorConfig {
            method,
            n,
            m,
            ..Default::default()
        }
    }

    pub fn oversampled(self, on: bool) -> Self {
        EstimatorConfig {
            oversampled: on,
            ..self
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("rel_tol must be positive".into()));
        }
        if self.n < 1 {
            return Err(Error::Config("model order n must be at least 1".into()));
        }
        if self.m > self.n {
            return Err(Error::Config(format!(
                "numerator order m = {} exceeds denominator order n = {}; the model must be proper",
                self.m, self.n
            )));
        }
        if let Some(l) = self.svf_cutoff {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config("svf_cutoff must be a positive frequency".into()));
            }
        }
        Ok(())
    }

    /// Checks that the record carries what this configuration consumes.
    pub(crate) fn check_record(&self, rec: &SampledRecord, spec: &InstrumentSpec) -> Result<()> {
        let d = self.dim();
        let usable = rec.len().saturating_sub(self.discard);
        if usable <= 2 * d {
            return Err(Error::MissingData(format!(
                "{usable} usable samples are too few for {d} parameters"
            )));
        }
        if self.oversampled && rec.u_fast.is_none() {
            return Err(Error::MissingData(
                "oversampled estimation requested but the record has no fast input track".into(),
            ));
        }
        match (self.method, &spec.variant) {
            (Method::Srivc, InstrumentVariant::OpenLoopIv)
            | (Method::Clsrivc, InstrumentVariant::ClosedLoopCt(_))
            | (Method::Clsrivc, InstrumentVariant::ClosedLoopDt(_)) => {}
            _ => {
                return Err(Error::Config(
                    "SRIVC uses the open-loop instrument, CLSRIVC a closed-loop one".into(),
                ))
            }
        }
        match (self.setting_hint, &spec.variant) {
            (Some(Setting::Continuous), InstrumentVariant::ClosedLoopDt(_))
            | (Some(Setting::Hybrid), InstrumentVariant::ClosedLoopCt(_)) => Err(Error::Config(
                "controller domain of the instrument does not match the setting".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "controller", rename_all = "snake_case")]
pub enum InstrumentVariant {
    /// Input-driven instrument of the basic iteration.
    OpenLoopIv,
    /// Reference through the estimated continuous control sensitivity.
    ClosedLoopCt(CtTf),
    /// Reference through the estimated discrete control sensitivity.
    ClosedLoopDt(DtTf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSpec {
    pub variant: InstrumentVariant,
}

impl InstrumentSpec {
    pub fn open_loop() -> Self {
        InstrumentSpec {
            variant: InstrumentVariant::OpenLoopIv,
        }
    }

    pub fn closed_loop_ct(c: CtTf) -> Self {
        InstrumentSpec {
            variant: InstrumentVariant::ClosedLoopCt(c),
        }
    }

    pub fn closed_loop_dt(c: DtTf) -> Self {
        InstrumentSpec {
            variant: InstrumentVariant::ClosedLoopDt(c),
        }
    }

    pub fn needs_reference(&self) -> bool {
        !matches!(self.variant, InstrumentVariant::OpenLoopIv)
    }

    /// The instrument a method uses on data from the given scenario.
    pub fn for_method(method: Method, scenario: &ScenarioConfig) -> Self {
        match (method, &scenario.controller) {
            (Method::Srivc, _) => Self::open_loop(),
            (Method::Clsrivc, Controller::Continuous(c)) => Self::closed_loop_ct(c.clone()),
            (Method::Clsrivc, Controller::Discrete(c)) => Self::closed_loop_dt(c.clone()),
        }
    }
}
