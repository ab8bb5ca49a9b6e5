use std::f64::consts::PI;

use log::{info, warn};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{log_spaced, mean_and_variance, MethodEntry, PointSummary, SweepSpec, MAX_FAILURE_RATE};
use crate::error::{Error, Result};
use crate::estim::Method;
use crate::lti::c2d_zoh;
use crate::presets::paper_bias;
use crate::sim::derive_seed;
use crate::theta::ThetaVector;
use crate::DtTf;

/// Points of the unit-circle grid the frequency-response distances use.
pub const METRIC_GRID: usize = 512;

fn response_distance(a: &DtTf, b: &DtTf) -> f64 {
    (0..METRIC_GRID)
        .map(|k| {
            let z = Complex::from_polar(1.0, 2.0 * PI * k as f64 / METRIC_GRID as f64);
            (a.eval(z) - b.eval(z)).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Where `model` sits between the true discrete plant (`0`) and the
/// negative inverse controller (`1`):
/// `||H - G_d|| / (||H - G_d|| + ||H + 1/C_d||)`.
pub fn normalized_bias(model: &DtTf, plant: &DtTf, controller: &DtTf) -> Result<f64> {
    let t = controller.negative_inverse()?;
    let to_plant = response_distance(model, plant);
    let to_inverse = response_distance(model, &t);
    if to_plant + to_inverse == 0.0 {
        return Err(Error::invalid("plant and negative inverse controller coincide"));
    }
    Ok(to_plant / (to_plant + to_inverse))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub snr_grid: Vec<f64>,
    pub runs_per_point: usize,
    pub n_samples: usize,
    pub master_seed: u64,
    pub method: Method,
}

impl Default for BiasSpec {
    fn default() -> Self {
        BiasSpec {
            snr_grid: log_spaced(1e-3, 1e3, 40),
            runs_per_point: 300,
            n_samples: 100_000,
            master_seed: 0,
            method: Method::Srivc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub snr: f64,
    pub mean_theta: Vec<f64>,
    /// ZOH equivalent of the mean model, descending coefficients.
    pub mean_model_num: Vec<f64>,
    pub mean_model_den: Vec<f64>,
    pub metric: f64,
    pub runs: usize,
    pub converged: usize,
    pub invalid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurveReport {
    pub method: String,
    pub n_samples: usize,
    pub points: Vec<BiasPoint>,
}

/// Bias of the averaged model against the disturbance level in the
/// biproper discrete-controller loop.
pub fn run_bias_vs_snr(spec: &BiasSpec) -> Result<BiasCurveReport> {
    if spec.runs_per_point < 1 || spec.snr_grid.is_empty() {
        return Err(Error::Config("bias sweep needs at least one SNR point and one run".into()));
    }
    if spec.snr_grid.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Config("SNR values must be positive and finite".into()));
    }
    let base = paper_bias(1.0).with_samples(spec.n_samples);
    base.validate()?;
    let plant_d = base.plant_zoh()?;
    let ctrl = base
        .discrete_controller()
        .cloned()
        .ok_or_else(|| Error::Config("bias scenario needs a discrete controller".into()))?;
    let entry = MethodEntry::new(spec.method, false);
    let sweep = SweepSpec {
        methods: vec![entry.clone()],
        sample_sizes: vec![spec.n_samples],
        runs_per_point: spec.runs_per_point,
        master_seed: spec.master_seed,
        ..SweepSpec::standard(base.clone())
    };
    let (n, m) = sweep.orders();
    let runs = spec.runs_per_point;
    let jobs: Vec<(usize, usize)> = (0..spec.snr_grid.len())
        .flat_map(|p| (0..runs).map(move |r| (p, r)))
        .collect();
    info!("bias sweep: {} SNR points x {runs} runs", spec.snr_grid.len());
    let instrument = [crate::estim::InstrumentSpec::for_method(spec.method, &base)];
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let sc = paper_bias(spec.snr_grid[p])
                .with_samples(spec.n_samples)
                .with_seed(derive_seed(spec.master_seed, (p * runs + r) as u64));
            super::sweep::run_methods(&sweep, &sc, &instrument).remove(0)
        })
        .collect();

    let mut points = Vec::new();
    for (p, &snr) in spec.snr_grid.iter().enumerate() {
        let cell = &outcomes[p * runs..(p + 1) * runs];
        let s = PointSummary::from_outcomes(entry.label(), spec.n_samples, cell, n + m + 1);
        let good: Vec<&Vec<f64>> = cell
            .iter()
            .filter_map(|o| match o {
                super::sweep::RunOutcome::Converged(t) => Some(t),
                _ => None,
            })
            .collect();
        let (mean, _) = mean_and_variance(&good, n + m + 1);
        let (num, den, metric) = if good.is_empty() {
            (Vec::new(), Vec::new(), f64::NAN)
        } else {
            let model = c2d_zoh(&ThetaVector::from_slice(&mean, n, m)?.tf()?, base.h)?;
            let d = normalized_bias(&model, &plant_d, &ctrl)?;
            (model.num().to_vec(), model.den().to_vec(), d)
        };
        if s.invalid {
            warn!("SNR {snr:.3e}: more than {:.0}% of the runs failed", MAX_FAILURE_RATE * 100.0);
        }
        points.push(BiasPoint {
            snr,
            mean_theta: mean,
            mean_model_num: num,
            mean_model_den: den,
            metric,
            runs,
            converged: s.converged,
            invalid: s.invalid,
        });
    }
    Ok(BiasCurveReport {
        method: entry.label().to_string(),
        n_samples: spec.n_samples,
        points,
    })
}
