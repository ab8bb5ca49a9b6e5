use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{EstimatorConfig, InstrumentSpec, StabilityProjection};
use super::ivstep::{iv_step_from, lssvf_init};
use super::projection::project_stable;
use super::signals::{build_instrument, build_regressor};
use crate::error::{fmt_roots, Error, Result};
use crate::lti::stability_check_ct;
use crate::sim::SampledRecord;
use crate::theta::ThetaVector;

/// Iterates are abandoned once their norm exceeds this multiple of the
/// initializer's.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    /// 1-based index of the iterate this step produced.
    pub iteration: usize,
    /// Condition number of the modified normal matrix.
    pub condition: f64,
    /// The incoming iterate had an unstable denominator and was reflected.
    pub projected: bool,
    /// The instrument's model closed loop had to be stabilized.
    pub prefilter_reflected: bool,
    /// RMS of `y_f - phi_f^T theta_{j+1}`.
    pub residual_rms: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: String,
    pub theta: ThetaVector,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Initializer followed by every iterate; stable-projected iterates are
    /// recorded in projected form.
    pub history: Vec<ThetaVector>,
    pub diagnostics: Vec<IterationDiagnostics>,
}

impl EstimationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Per-iteration condition numbers and events as CSV.
    pub fn write_trace(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(
            out,
            "iteration,condition,projected,prefilter_reflected,residual_rms,relative_change"
        )
        .unwrap();
        for d in &self.diagnostics {
            writeln!(
                out,
                "{},{:e},{},{},{:e},{:e}",
                d.iteration, d.condition, d.projected, d.prefilter_reflected, d.residual_rms, d.relative_change
            )
            .unwrap();
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Full estimation from the state-variable-filter initializer.
pub fn estimate(rec: &SampledRecord, cfg: &EstimatorConfig, spec: &InstrumentSpec) -> Result<EstimationResult> {
    cfg.validate()?;
    cfg.check_record(rec, spec)?;
    let init = lssvf_init(rec, cfg)?;
    estimate_from(rec, cfg, spec, init)
}

/// Iterates from a given initial parameter vector.
pub fn estimate_from(
    rec: &SampledRecord,
    cfg: &EstimatorConfig,
    spec: &InstrumentSpec,
    init: ThetaVector,
) -> Result<EstimationResult> {
    cfg.validate()?;
    cfg.check_record(rec, spec)?;
    if init.n() != cfg.n || init.m() != cfg.m {
        return Err(Error::invalid("initial parameter vector has the wrong orders"));
    }
    let start = cfg.discard.min(rec.len());
    let guard = DIVERGENCE_FACTOR * init.norm().max(1e-12);
    let mut history = vec![init];
    let mut diagnostics = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for j in 0..cfg.max_iter {
        let at = |e: Error| Error::AtIteration {
            iteration: j + 1,
            source: Box::new(e),
        };
        let current = history.last().unwrap().clone();
        let (theta_j, projected) = if stability_check_ct(&current.den()).stable {
            (current, false)
        } else {
            match cfg.stability_projection {
                StabilityProjection::Reflect => {
                    log::warn!("iteration {}: reflecting unstable model denominator", j + 1);
                    let (p, _) = project_stable(&current);
                    *history.last_mut().unwrap() = p.clone();
                    (p, true)
                }
                StabilityProjection::Abort => {
                    let rep = stability_check_ct(&current.den());
                    return Err(at(Error::Unstable {
                        what: "model denominator A_j(p) (prefilters must be stable)".into(),
                        roots: fmt_roots(&rep.unstable_roots),
                    }));
                }
            }
        };
        let reg = build_regressor(rec, &theta_j, cfg).map_err(at)?;
        let ins = build_instrument(rec, &theta_j, cfg, spec).map_err(at)?;
        let sol = iv_step_from(&ins.phi_hat, &reg.phi, &reg.y_f, cfg.n, cfg.m, start).map_err(at)?;
        let next = sol.theta;
        let tv = next.to_vec();
        let mut ss = 0.0;
        for k in start..rec.len() {
            let col = reg.phi.column(k);
            let pred: f64 = col.iter().zip(&tv).map(|(a, b)| a * b).sum();
            ss += (reg.y_f[k] - pred).powi(2);
        }
        let denom = theta_j.norm().max(f64::MIN_POSITIVE);
        let change = theta_j
            .to_vec()
            .iter()
            .zip(&tv)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / denom;
        diagnostics.push(IterationDiagnostics {
            iteration: j + 1,
            condition: sol.condition,
            projected,
            prefilter_reflected: ins.prefilter_reflected,
            residual_rms: (ss / (rec.len() - start).max(1) as f64).sqrt(),
            relative_change: change,
        });
        let norm = next.norm();
        history.push(next);
        if !(norm <= guard) {
            stop = StopReason::Diverged;
            break;
        }
        if change < cfg.rel_tol {
            stop = StopReason::Converged;
            break;
        }
    }

    let iterations = diagnostics.len();
    Ok(EstimationResult {
        method: cfg.method.label(cfg.oversampled).to_string(),
        theta: history.last().unwrap().clone(),
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        iterations,
        history,
        diagnostics,
    })
}
