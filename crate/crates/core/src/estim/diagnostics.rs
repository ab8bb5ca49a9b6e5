use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::{EstimatorConfig, InstrumentSpec, InstrumentVariant};
use super::ivstep::cross_moments;
use super::signals::{build_instrument, sylvester_filter};
use crate::error::{Error, Result};
use crate::filtering::{derivative_bank, HoldType};
use crate::lti::{c2d_zoh, impulse_response_l1, stability_check_ct};
use crate::sim::{simulate, Controller, SampledRecord, ScenarioConfig};
use crate::theta::ThetaVector;
use crate::{CtPoly, CtTf, DtTf, Signal};

const BLOCKS: usize = 10;

/// Sample-average estimates of the splitting `E{phi_hat phi^T} = main + perturbation`
/// and the sufficient non-singularity condition `||perturbation|| < sigma_min(main)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalMatrixDiagnostics {
    pub sigma_min_main: f64,
    /// Batch-means standard error over ten contiguous blocks.
    pub sigma_min_main_se: f64,
    pub norm_perturbation: f64,
    pub norm_perturbation_se: f64,
    pub condition_ok: bool,
    pub main: Vec<Vec<f64>>,
    pub perturbation: Vec<Vec<f64>>,
}

/// Rows `nums[r](p) / den(p) x` from one bank of `1/den`.
fn poly_filter_rows(den: &CtPoly, nums: &[CtPoly], x: &Signal) -> Result<DMatrix<f64>> {
    let top = nums.iter().map(|p| p.degree()).max().unwrap_or(0);
    let bank = derivative_bank(den, x, HoldType::Zoh, top)?;
    let w = DMatrix::from_fn(nums.len(), top + 1, |r, d| nums[r].coeff(d));
    Ok(w * bank.matrix())
}

/// Lower rows `1..=n` of a bank of `1/a`, as a full-height matrix with
/// zero input rows.
fn output_rows(a: &CtPoly, x: &Signal, n: usize, m: usize) -> Result<DMatrix<f64>> {
    let bank = derivative_bank(a, x, HoldType::Zoh, n)?;
    let mut out = DMatrix::zeros(n + m + 1, x.len());
    for k in 0..x.len() {
        let b = bank.at(k);
        for i in 1..=n {
            out[(i - 1, k)] = b[i];
        }
    }
    Ok(out)
}

fn input_rows(a: &CtPoly, x: &Signal, n: usize, m: usize) -> Result<DMatrix<f64>> {
    let bank = derivative_bank(a, x, HoldType::Zoh, m)?;
    let mut out = DMatrix::zeros(n + m + 1, x.len());
    for k in 0..x.len() {
        let b = bank.at(k);
        for j in 0..=m {
            out[(n + j, k)] = b[j];
        }
    }
    Ok(out)
}

fn moment(a: &DMatrix<f64>, b: &DMatrix<f64>, lo: usize, hi: usize) -> DMatrix<f64> {
    let zeros = vec![0.0; a.ncols()];
    let (r, _) = cross_moments(&a.columns(0, hi).into_owned(), &b.columns(0, hi).into_owned(), &zeros[..hi], lo);
    r / (hi - lo) as f64
}

fn sigma_min(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.min()
}

fn norm2(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Pairs `(a, b)` whose averaged products `a b^T` sum to a matrix term.
type Terms = Vec<(DMatrix<f64>, DMatrix<f64>)>;

fn summarize(main: &Terms, pert: &Terms, start: usize, len: usize) -> Result<NormalMatrixDiagnostics> {
    let avg = |terms: &Terms, lo: usize, hi: usize| {
        let d = terms[0].0.nrows();
        terms
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, (a, b)| acc + moment(a, b, lo, hi))
    };
    if len < start + BLOCKS * 2 {
        return Err(Error::MissingData("record too short for batch-means diagnostics".into()));
    }
    let mm = avg(main, start, len);
    let pm = avg(pert, start, len);
    let block = (len - start) / BLOCKS;
    let mut s_main = Vec::new();
    let mut s_pert = Vec::new();
    for b in 0..BLOCKS {
        let lo = start + b * block;
        let hi = lo + block;
        s_main.push(sigma_min(&avg(main, lo, hi)));
        s_pert.push(norm2(&avg(pert, lo, hi)));
    }
    let se = |v: &[f64]| {
        let n = v.len() as f64;
        let mu = v.iter().sum::<f64>() / n;
        (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    };
    let sigma_min_main = sigma_min(&mm);
    let norm_perturbation = norm2(&pm);
    Ok(NormalMatrixDiagnostics {
        sigma_min_main,
        sigma_min_main_se: se(&s_main),
        norm_perturbation,
        norm_perturbation_se: se(&s_pert),
        condition_ok: norm_perturbation < sigma_min_main,
        main: to_rows(&mm),
        perturbation: to_rows(&pm),
    })
}

fn scenario_of(rec: &SampledRecord) -> Result<&ScenarioConfig> {
    let sc = rec.meta.scenario.as_ref().ok_or_else(|| {
        Error::MissingData("normal-matrix diagnostics need the generating scenario (synthetic records only)".into())
    })?;
    if sc.n_samples != rec.len() {
        return Err(Error::MissingData(
            "record length differs from its scenario; the noise-free reference run cannot be aligned".into(),
        ));
    }
    Ok(sc)
}

/// Empirical check of the sufficient condition for a non-singular modified
/// normal matrix at the parameter vector `theta`.
///
/// Continuous controller: `main = E{phi_hat phi_tilde^T}` with `phi_tilde`
/// the interpolation-free regressor of the reference through `T_o`, `S_uo`,
/// and `perturbation = E{phi_hat Delta^T}` where `Delta` compares it with the
/// regressor built from the sampled noise-free output. Discrete controller:
/// the same split in terms of `r~ = S_uo(q) r`; for SRIVC the disturbance
/// brings the extra terms `v_f2 v_f2^T` (main) and
/// `v_hat_f1 v_f^T + v_f2 v_f1^T` (perturbation).
pub fn normal_matrix_diagnostics(
    rec: &SampledRecord,
    theta: &ThetaVector,
    cfg: &EstimatorConfig,
    spec: &InstrumentSpec,
) -> Result<NormalMatrixDiagnostics> {
    cfg.validate()?;
    cfg.check_record(rec, spec)?;
    let sc = scenario_of(rec)?;
    let (n, m) = (cfg.n, cfg.m);
    let aj = theta.den();
    stability_check_ct(&aj).require("model denominator A_j(p)")?;
    let bj = theta.num();
    let a_true = sc.plant.den().clone();
    let b_true = sc.plant.num().clone();
    let start = cfg.discard.min(rec.len());
    let phi_hat = build_instrument(rec, theta, cfg, spec)?.phi_hat;

    match &sc.controller {
        Controller::Continuous(c) => {
            let d_loop = CtTf::loop_characteristic(&sc.plant, c);
            let nt = &b_true * c.num();
            let ns = &a_true * c.num();
            let den = &aj * &d_loop;
            let mut nums: Vec<CtPoly> = (1..=n).map(|i| -&nt.shift(i)).collect();
            nums.extend((0..=m).map(|k| ns.shift(k)));
            let phi_tilde = poly_filter_rows(&den, &nums, &rec.r)?;

            let clean = simulate(&sc.noise_free())?;
            let mut delta = output_rows(&den, &rec.r, n, m)?;
            let to_rows_p: Vec<CtPoly> = (1..=n).map(|i| nt.shift(i)).collect();
            let combined = poly_filter_rows(&den, &to_rows_p, &rec.r)?;
            let sampled = output_rows(&aj, &clean.y, n, m)?;
            for k in 0..rec.len() {
                for i in 0..n {
                    delta[(i, k)] = combined[(i, k)] - sampled[(i, k)];
                }
            }
            summarize(&vec![(phi_hat.clone(), phi_tilde)], &vec![(phi_hat, delta)], start, rec.len())
        }
        Controller::Discrete(cd) => {
            let gd = c2d_zoh(&sc.plant, sc.h)?;
            let suo = DtTf::control_sensitivity(&gd, cd)?;
            let so = DtTf::output_sensitivity(&gd, cd)?;
            let v: Vec<f64> = match &rec.v {
                Some(v) => v.clone(),
                // The loop identity y = G_d u + v recovers the disturbance.
                None => {
                    let yu = gd.filter(rec.u.values());
                    rec.y.values().iter().zip(&yu).map(|(a, b)| a - b).collect()
                }
            };
            let r_t = rec.r.with_values(suo.filter(rec.r.values()));
            let v_t = rec.r.with_values(suo.filter(&v));
            let so_v = rec.r.with_values(so.filter(&v));

            let den = &aj * &a_true;
            let mut nums: Vec<CtPoly> = (1..=n).map(|i| -&b_true.shift(i)).collect();
            nums.extend((0..=m).map(|k| a_true.shift(k)));
            let phi_tilde = poly_filter_rows(&den, &nums, &r_t)?;

            let gr = r_t.with_values(gd.filter(r_t.values()));
            let direct: Vec<CtPoly> = (1..=n).map(|i| b_true.shift(i)).collect();
            let combined = poly_filter_rows(&den, &direct, &r_t)?;
            let sampled = output_rows(&aj, &gr, n, m)?;
            let mut delta = DMatrix::zeros(n + m + 1, rec.len());
            for k in 0..rec.len() {
                for i in 0..n {
                    delta[(i, k)] = combined[(i, k)] - sampled[(i, k)];
                }
            }

            match spec.variant {
                InstrumentVariant::OpenLoopIv => {
                    let a2 = &aj * &aj;
                    let top = n + m;
                    let bank_r = derivative_bank(&a2, &r_t, HoldType::Zoh, top)?;
                    let phi_hat_r = sylvester_filter(&aj, &-&bj, n, m, &bank_r)?;
                    let bank_v = derivative_bank(&a2, &v_t, HoldType::Zoh, top)?;
                    let mut v_hat_f1 = sylvester_filter(&aj, &-&bj, n, m, &bank_v)?;
                    for k in 0..rec.len() {
                        for j in 0..=m {
                            v_hat_f1[(n + j, k)] = 0.0;
                        }
                    }
                    let v_f1 = output_rows(&aj, &so_v, n, m)?;
                    let v_f2 = input_rows(&aj, &v_t, n, m)?;
                    let v_f = &v_f1 + &v_f2;
                    let main = vec![(phi_hat_r.clone(), phi_tilde), (v_f2.clone(), v_f2.clone())];
                    let pert = vec![(phi_hat_r, delta), (v_hat_f1, v_f), (v_f2, v_f1)];
                    summarize(&main, &pert, start, rec.len())
                }
                _ => summarize(&vec![(phi_hat.clone(), phi_tilde)], &vec![(phi_hat, delta)], start, rec.len()),
            }
        }
    }
}

/// Right-hand side of the intersample bound
/// `|eps_r| <= ||g_bar||_1 * max gap * sup |d r_S / dt|`.
///
/// `r_s` is the sensitivity-filtered reference on a fine grid, used only for
/// the finite-difference derivative estimate; `grid` holds the instants at
/// which the input is known. Diagnostic only.
pub fn epsilon_r_bound(theta_bar: &ThetaVector, r_s: &Signal, grid: &[f64]) -> Result<f64> {
    let g = theta_bar.tf()?;
    if !g.is_strictly_proper() {
        return Err(Error::invalid("the bound needs a strictly proper model"));
    }
    stability_check_ct(g.den()).require("model in the intersample bound")?;
    if grid.len() < 2 {
        return Err(Error::invalid("the input grid needs at least two instants"));
    }
    let gap = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let v = r_s.values();
    let deriv = v
        .windows(2)
        .map(|w| ((w[1] - w[0]) / r_s.h()).abs())
        .fold(0.0, f64::max);
    if deriv == 0.0 {
        return Ok(0.0);
    }
    let fastest = g.poles().iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-6);
    let slowest = g.poles().iter().map(|p| -p.re).fold(f64::INFINITY, f64::min);
    let l1 = impulse_response_l1(&g, 10.0 / slowest, 0.01 / fastest)?;
    Ok(l1 * gap * deriv)
}
