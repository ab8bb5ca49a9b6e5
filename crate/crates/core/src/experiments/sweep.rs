use std::collections::HashSet;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estim::{estimate, EstimatorConfig, InstrumentSpec, Method};
use crate::sim::{derive_seed, simulate, ScenarioConfig, Setting};
use crate::theta::ThetaVector;

/// Share of failed runs above which a sweep point is flagged invalid.
pub const MAX_FAILURE_RATE: f64 = 0.10;

/// One estimator in a sweep. Without an explicit instrument the method's
/// default for the scenario is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    pub method: Method,
    #[serde(default)]
    pub oversampled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<InstrumentSpec>,
}

impl MethodEntry {
    pub fn new(method: Method, oversampled: bool) -> Self {
        MethodEntry {
            method,
            oversampled,
            instrument: None,
        }
    }

    pub fn label(&self) -> &'static str {
        self.method.label(self.oversampled)
    }

    fn instrument_for(&self, scenario: &ScenarioConfig) -> InstrumentSpec {
        self.instrument
            .clone()
            .unwrap_or_else(|| InstrumentSpec::for_method(self.method, scenario))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: ScenarioConfig,
    pub methods: Vec<MethodEntry>,
    pub sample_sizes: Vec<usize>,
    pub runs_per_point: usize,
    pub master_seed: u64,
    /// Model orders; the plant's own orders when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<(usize, usize)>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_max_iter() -> usize {
    200
}

fn default_rel_tol() -> f64 {
    1e-7
}

/// `count` integers spaced evenly in log scale between `lo` and `hi`
/// (inclusive), rounded and deduplicated.
pub fn log_spaced_sizes(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = log_spaced(lo as f64, hi as f64, count)
        .into_iter()
        .map(|x| x.round() as usize)
        .collect();
    out.dedup();
    out
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl SweepSpec {
    /// The four estimators of a setting: plain and oversampled SRIVC and
    /// CLSRIVC for setting 1, plain SRIVC and CLSRIVC for setting 2.
    pub fn standard(scenario: ScenarioConfig) -> Self {
        let mut methods = vec![MethodEntry::new(Method::Srivc, false), MethodEntry::new(Method::Clsrivc, false)];
        if scenario.setting == Setting::Continuous {
            methods.push(MethodEntry::new(Method::Srivc, true));
            methods.push(MethodEntry::new(Method::Clsrivc, true));
        }
        SweepSpec {
            scenario,
            methods,
            sample_sizes: log_spaced_sizes(200, 200_000, 40),
            runs_per_point: 300,
            master_seed: 0,
            orders: None,
            max_iter: default_max_iter(),
            rel_tol: default_rel_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point < 1 {
            return Err(Error::Config("runs_per_point must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sample_sizes must be non-empty and strictly ascending".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        for e in &self.methods {
            if e.oversampled && self.scenario.oversample_m.is_none() {
                return Err(Error::Config(format!(
                    "{} needs a scenario with oversample_m set",
                    e.label()
                )));
            }
        }
        self.scenario.validate()?;
        Ok(())
    }

    pub fn orders(&self) -> (usize, usize) {
        self.orders
            .unwrap_or((self.scenario.plant.den().degree(), self.scenario.plant.num().degree()))
    }

    pub(crate) fn estimator_config(&self, entry: &MethodEntry) -> EstimatorConfig {
        let (n, m) = self.orders();
        let mut cfg = EstimatorConfig::new(entry.method, n, m).oversampled(entry.oversampled);
        cfg.max_iter = self.max_iter;
        cfg.rel_tol = self.rel_tol;
        cfg
    }

    /// Seed of run `run` at grid point `point`; all methods share the record.
    pub fn run_seed(&self, point: usize, run: usize) -> u64 {
        derive_seed(self.master_seed, (point * self.runs_per_point + run) as u64)
    }

    /// Fails if two runs anywhere on the grid would receive the same seed.
    pub fn check_seed_partition(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.sample_sizes.len() * self.runs_per_point);
        for p in 0..self.sample_sizes.len() {
            for r in 0..self.runs_per_point {
                if !seen.insert(self.run_seed(p, r)) {
                    return Err(Error::Config(format!("derived seed collision at point {p}, run {r}")));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of one estimator on one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunOutcome {
    Converged(Vec<f64>),
    NotConverged(Vec<f64>),
    Failed(String),
}

/// Summary of one (method, N) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub method: String,
    pub n_samples: usize,
    pub runs: usize,
    /// Runs entering the mean.
    pub converged: usize,
    pub not_converged: usize,
    pub errors: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub invalid: bool,
}

impl PointSummary {
    pub fn from_outcomes(method: &str, n_samples: usize, outcomes: &[RunOutcome], dim: usize) -> Self {
        let good: Vec<&Vec<f64>> = outcomes
            .iter()
            .filter_map(|o| match o {
                RunOutcome::Converged(t) => Some(t),
                _ => None,
            })
            .collect();
        let not_converged = outcomes.iter().filter(|o| matches!(o, RunOutcome::NotConverged(_))).count();
        let errors = outcomes.iter().filter(|o| matches!(o, RunOutcome::Failed(_))).count();
        let (mean, variance) = mean_and_variance(&good, dim);
        let failed = not_converged + errors;
        PointSummary {
            method: method.to_string(),
            n_samples,
            runs: outcomes.len(),
            converged: good.len(),
            not_converged,
            errors,
            mean,
            variance,
            invalid: failed as f64 > MAX_FAILURE_RATE * outcomes.len() as f64,
        }
    }

    /// Standard error of each mean, `sqrt(var / converged)`.
    pub fn std_error(&self) -> Vec<f64> {
        self.variance
            .iter()
            .map(|v| (v / self.converged.max(1) as f64).sqrt())
            .collect()
    }

    /// `|mean - truth| / std_error` per parameter.
    pub fn z_scores(&self, truth: &[f64]) -> Vec<f64> {
        self.mean
            .iter()
            .zip(truth)
            .zip(self.std_error())
            .map(|((m, t), se)| (m - t).abs() / se)
            .collect()
    }
}

/// Sample mean and unbiased sample variance, accumulated in index order.
pub(crate) fn mean_and_variance(samples: &[&Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let k = samples.len();
    if k == 0 {
        return (vec![f64::NAN; dim], vec![f64::NAN; dim]);
    }
    let mut mean = vec![0.0; dim];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    let mut var = vec![0.0; dim];
    if k > 1 {
        for s in samples {
            for ((v, x), m) in var.iter_mut().zip(s.iter()).zip(&mean) {
                *v += (x - m).powi(2);
            }
        }
        var.iter_mut().for_each(|v| *v /= (k - 1) as f64);
    }
    (mean, var)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter_labels: Vec<String>,
    pub truth: Vec<f64>,
    pub methods: Vec<String>,
    pub sample_sizes: Vec<usize>,
    pub master_seed: u64,
    /// Method-major: all sample sizes of the first method, then the next.
    pub points: Vec<PointSummary>,
}

impl SweepReport {
    pub fn point(&self, method: &str, n_samples: usize) -> Option<&PointSummary> {
        self.points
            .iter()
            .find(|p| p.method == method && p.n_samples == n_samples)
    }

    pub fn series(&self, method: &str) -> Vec<&PointSummary> {
        self.points.iter().filter(|p| p.method == method).collect()
    }
}

/// Runs all estimators on a shared record per (N, run).
pub(crate) fn run_methods(
    spec: &SweepSpec,
    scenario: &ScenarioConfig,
    instruments: &[InstrumentSpec],
) -> Vec<RunOutcome> {
    let rec = match simulate(scenario) {
        Ok(r) => r,
        Err(e) => {
            warn!("simulation failed (seed {}): {e}", scenario.seed);
            return vec![RunOutcome::Failed(e.code().to_string()); spec.methods.len()];
        }
    };
    spec.methods
        .iter()
        .zip(instruments)
        .map(|(entry, ins)| {
            let cfg = spec.estimator_config(entry);
            match estimate(&rec, &cfg, ins) {
                Ok(res) if res.converged => RunOutcome::Converged(res.theta.to_vec()),
                Ok(res) => {
                    debug!("{} stopped without converging ({:?})", entry.label(), res.stop_reason);
                    RunOutcome::NotConverged(res.theta.to_vec())
                }
                Err(e) => {
                    warn!("{} failed (seed {}, N {}): {e}", entry.label(), scenario.seed, scenario.n_samples);
                    RunOutcome::Failed(e.code().to_string())
                }
            }
        })
        .collect()
}

/// Monte Carlo sweep over the sample size.
///
/// Every run draws a fresh record from its derived seed and hands it to all
/// methods. Individual failures are logged and counted, never fatal. Runs
/// are executed on the current rayon pool; the report does not depend on
/// the number of threads.
pub fn run_consistency_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    spec.check_seed_partition()?;
    let (n, m) = spec.orders();
    let truth = spec.scenario.true_theta()?;
    if truth.n() != n || truth.m() != m {
        warn!("model orders ({n}, {m}) differ from the plant's; truth lines are omitted");
    }
    let instruments: Vec<InstrumentSpec> = spec.methods.iter().map(|e| e.instrument_for(&spec.scenario)).collect();
    let runs = spec.runs_per_point;
    let jobs: Vec<(usize, usize)> = (0..spec.sample_sizes.len())
        .flat_map(|p| (0..runs).map(move |r| (p, r)))
        .collect();
    info!(
        "sweep: {} sample sizes x {} runs x {} methods",
        spec.sample_sizes.len(),
        runs,
        spec.methods.len()
    );
    let outcomes: Vec<Vec<RunOutcome>> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let sc = spec
                .scenario
                .with_samples(spec.sample_sizes[p])
                .with_seed(spec.run_seed(p, r));
            run_methods(spec, &sc, &instruments)
        })
        .collect();

    let dim = n + m + 1;
    let mut points = Vec::new();
    for (k, entry) in spec.methods.iter().enumerate() {
        for (p, &size) in spec.sample_sizes.iter().enumerate() {
            let cell: Vec<RunOutcome> = (0..runs).map(|r| outcomes[p * runs + r][k].clone()).collect();
            let s = PointSummary::from_outcomes(entry.label(), size, &cell, dim);
            if s.invalid {
                warn!("{} at N = {size}: {} of {} runs failed", s.method, s.runs - s.converged, s.runs);
            }
            points.push(s);
        }
    }
    let matches_truth = truth.n() == n && truth.m() == m;
    Ok(SweepReport {
        parameter_labels: ThetaVector::labels(n, m),
        truth: if matches_truth { truth.to_vec() } else { Vec::new() },
        methods: spec.methods.iter().map(|e| e.label().to_string()).collect(),
        sample_sizes: spec.sample_sizes.clone(),
        master_seed: spec.master_seed,
        points,
    })
}
