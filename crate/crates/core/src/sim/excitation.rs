use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::Signal;

/// Below this relative eigenvalue the lag-covariance matrix is treated as
/// singular.
pub const EXCITATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationReport {
    pub satisfied: bool,
    /// Smallest eigenvalue of the lag-covariance matrix divided by its trace.
    pub rank_gap: f64,
}

/// Persistence-of-excitation test of the given order.
///
/// Uses the covariance-method estimate `R_ij = 1/(N-o+1) sum_k x_{k-i} x_{k-j}`
/// over the samples where all lags are available. Unlike the biased Toeplitz
/// estimate this matrix is exactly singular for signals that satisfy a
/// linear recursion of length `order`, e.g. `order >= 3` for one sinusoid.
pub fn excitation_order(r: &Signal, order: usize) -> Result<ExcitationReport> {
    if order == 0 {
        return Err(Error::invalid("excitation order must be at least 1"));
    }
    let x = r.values();
    if x.len() < 4 * order {
        return Err(Error::invalid(format!(
            "excitation test of order {order} needs at least {} samples, got {}",
            4 * order,
            x.len()
        )));
    }
    let o = order;
    let rows = x.len() - o + 1;
    let mut m = DMatrix::<f64>::zeros(o, o);
    for k in (o - 1)..x.len() {
        for i in 0..o {
            let xi = x[k - i];
            for j in 0..=i {
                m[(i, j)] += xi * x[k - j];
            }
        }
    }
    for i in 0..o {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    m /= rows as f64;
    let trace = m.trace();
    if !(trace > 0.0) {
        return Ok(ExcitationReport {
            satisfied: false,
            rank_gap: 0.0,
        });
    }
    let lmin = SymmetricEigen::new(m).eigenvalues.min();
    let rank_gap = lmin / trace;
    Ok(ExcitationReport {
        satisfied: rank_gap > EXCITATION_TOL,
        rank_gap,
    })
}
