use nalgebra::{DMatrix, DVector};

use super::config::EstimatorConfig;
use super::signals::regressor_with;
use crate::error::{Error, Result};
use crate::sim::SampledRecord;
use crate::theta::ThetaVector;
use crate::CtPoly;

/// Modified normal matrices beyond this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `sum_k a_k b_k^T` and `sum_k a_k y_k` over columns `start..`.
pub(crate) fn cross_moments(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    y: &[f64],
    start: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let d = a.nrows();
    let mut r = DMatrix::zeros(d, b.nrows());
    let mut f = DVector::zeros(d);
    let (sa, sb) = (a.as_slice(), b.as_slice());
    let db = b.nrows();
    for k in start..a.ncols() {
        let ca = &sa[k * d..(k + 1) * d];
        let cb = &sb[k * db..(k + 1) * db];
        for i in 0..d {
            let ai = ca[i];
            for j in 0..db {
                r[(i, j)] += ai * cb[j];
            }
            f[i] += ai * y[k];
        }
    }
    (r, f)
}

/// 2-norm condition number from the singular values (infinite when singular).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    if lo > 0.0 && lo.is_finite() {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn check_shapes(phi_hat: &DMatrix<f64>, phi: &DMatrix<f64>, y_f: &[f64]) -> Result<()> {
    if phi_hat.shape() != phi.shape() || y_f.len() != phi.ncols() {
        return Err(Error::invalid(format!(
            "instrument {:?}, regressor {:?} and output ({}) are not conformable",
            phi_hat.shape(),
            phi.shape(),
            y_f.len()
        )));
    }
    if phi.ncols() <= phi.nrows() {
        return Err(Error::MissingData(format!(
            "{} samples for {} parameters",
            phi.ncols(),
            phi.nrows()
        )));
    }
    Ok(())
}

/// Solution of a (modified) normal equation with its condition number.
#[derive(Debug, Clone)]
pub struct IvSolution {
    pub theta: ThetaVector,
    pub condition: f64,
}

fn solve(r: DMatrix<f64>, f: DVector<f64>, n: usize, m: usize, ls: bool) -> Result<IvSolution> {
    let condition = condition_number(&r);
    if !(condition <= MAX_CONDITION) {
        return Err(if ls {
            Error::RankDeficient { condition }
        } else {
            Error::SingularNormalMatrix { condition }
        });
    }
    let x = r
        .lu()
        .solve(&f)
        .ok_or(Error::SingularNormalMatrix { condition })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularNormalMatrix { condition });
    }
    // The column layout fixes the denominator constant at one, so no
    // renormalization is needed.
    Ok(IvSolution {
        theta: ThetaVector::from_slice(x.as_slice(), n, m)?,
        condition,
    })
}

/// One instrumental-variable step `[sum phi_hat phi^T]^{-1} sum phi_hat y_f`,
/// averaging over samples `start..`.
pub fn iv_step_from(
    phi_hat: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    y_f: &[f64],
    n: usize,
    m: usize,
    start: usize,
) -> Result<IvSolution> {
    check_shapes(phi_hat, phi, y_f)?;
    if phi.nrows() != n + m + 1 {
        return Err(Error::invalid("regressor height does not match the model orders"));
    }
    let (r, f) = cross_moments(phi_hat, phi, y_f, start.min(phi.ncols()));
    solve(r, f, n, m, false)
}

pub fn iv_step(phi_hat: &DMatrix<f64>, phi: &DMatrix<f64>, y_f: &[f64], n: usize, m: usize) -> Result<IvSolution> {
    iv_step_from(phi_hat, phi, y_f, n, m, 0)
}

/// Bandwidth of the state-variable filter when none is configured: the
/// reciprocal of the lag at which the output autocorrelation first falls
/// below `1/e`, kept within `[0.01/h, 1/h]`.
pub fn default_svf_cutoff(rec: &SampledRecord) -> f64 {
    let y = rec.y.values();
    let h = rec.h();
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let r0: f64 = c.iter().map(|v| v * v).sum();
    if !(r0 > 0.0) {
        return 1.0 / h;
    }
    let max_lag = (n / 4).clamp(1, 100);
    let mut lag = max_lag;
    for tau in 1..=max_lag {
        let rt: f64 = c[tau..].iter().zip(&c[..n - tau]).map(|(a, b)| a * b).sum();
        if rt / r0 < (-1.0f64).exp() {
            lag = tau;
            break;
        }
    }
    (1.0 / (lag as f64 * h)).clamp(0.01 / h, 1.0 / h)
}

/// Least squares on state-variable-filtered data with `A_svf = (p/lambda + 1)^n`.
pub fn lssvf_init(rec: &SampledRecord, cfg: &EstimatorConfig) -> Result<ThetaVector> {
    cfg.validate()?;
    let lambda = cfg.svf_cutoff.unwrap_or_else(|| default_svf_cutoff(rec));
    if rec.len() <= 2 * cfg.dim() {
        return Err(Error::MissingData(format!(
            "{} samples are too few for {} parameters",
            rec.len(),
            cfg.dim()
        )));
    }
    let a = CtPoly::from_f64(&[1.0, 1.0 / lambda]).pow(cfg.n as u32);
    let reg = regressor_with(rec, &a, cfg)?;
    let (r, f) = cross_moments(&reg.phi, &reg.phi, &reg.y_f, cfg.discard.min(rec.len()));
    Ok(solve(r, f, cfg.n, cfg.m, true)?.theta)
}
