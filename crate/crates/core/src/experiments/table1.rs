use serde::{Deserialize, Serialize};

use super::sweep::{MethodEntry, PointSummary, SweepSpec};
use crate::error::Result;
use crate::estim::Method;
use crate::presets::paper_setting1;
use crate::sim::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub method: String,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub converged: usize,
    pub runs: usize,
}

/// Sample means of the continuous-loop experiment at the finer period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub parameter_labels: Vec<String>,
    pub truth: Vec<f64>,
    pub h: f64,
    pub n_samples: usize,
    pub rows: Vec<Table1Row>,
}

/// Setting 1 at `h = 0.02`, `N = 200000`, without the fast input track.
pub fn table1_scenario() -> ScenarioConfig {
    ScenarioConfig {
        h: 0.02,
        oversample_m: None,
        ..paper_setting1()
    }
}

pub fn run_table1(runs: usize, seed: u64) -> Result<Table1Report> {
    run_table1_with(&table1_scenario(), runs, seed)
}

/// SRIVC and CLSRIVC sample means over `runs` records of `scenario`.
pub fn run_table1_with(scenario: &ScenarioConfig, runs: usize, seed: u64) -> Result<Table1Report> {
    let spec = SweepSpec {
        methods: vec![MethodEntry::new(Method::Srivc, false), MethodEntry::new(Method::Clsrivc, false)],
        sample_sizes: vec![scenario.n_samples],
        runs_per_point: runs,
        master_seed: seed,
        ..SweepSpec::standard(scenario.clone())
    };
    let rep = super::run_consistency_sweep(&spec)?;
    let row = |p: &PointSummary| Table1Row {
        method: p.method.clone(),
        mean: p.mean.clone(),
        std_error: p.std_error(),
        converged: p.converged,
        runs: p.runs,
    };
    Ok(Table1Report {
        parameter_labels: rep.parameter_labels.clone(),
        truth: rep.truth.clone(),
        h: scenario.h,
        n_samples: scenario.n_samples,
        rows: rep.points.iter().map(row).collect(),
    })
}
