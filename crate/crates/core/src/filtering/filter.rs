use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::signal::SampledSignal;
use crate::error::{Error, Result};
use crate::lti::{foh_matrices, zoh_matrices, CtTransferFunction, StateSpaceModel};
use crate::scalar::Scalar;

/// Intersample behaviour assumed for a sampled input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldType {
    #[default]
    Zoh,
    Foh,
}

/// Flat, allocation-free single-input discrete recursion
/// `x_{k+1} = Phi x_k + Gamma u_k` (plus an optional ramp term for FOH).
#[derive(Debug, Clone)]
pub(crate) struct Recursion<T: Scalar> {
    pub n: usize,
    /// Row-major `n x n`.
    pub phi: Vec<T>,
    pub g0: Vec<T>,
    pub g1: Option<Vec<T>>,
}

impl<T: Scalar> Recursion<T> {
    pub fn discretize(ss: &StateSpaceModel<T>, h: T, hold: HoldType) -> Result<Self> {
        let n = ss.states();
        let (phi, g0, g1) = match hold {
            HoldType::Zoh => {
                let (p, g) = zoh_matrices(&ss.a, &ss.b, h)?;
                (p, g, None)
            }
            HoldType::Foh => {
                let (p, g0, g1) = foh_matrices(&ss.a, &ss.b, h)?;
                (p, g0, Some(g1))
            }
        };
        Ok(Recursion {
            n,
            phi: row_major(&phi),
            g0: g0.column(0).iter().copied().collect(),
            g1: g1.map(|g| g.column(0).iter().copied().collect()),
        })
    }

    /// Runs from rest and hands the state at every sample instant to `visit`
    /// (the state at `t_k` depends on inputs up to `k-1` only).
    pub fn run(&self, u: &[T], mut visit: impl FnMut(usize, &[T])) {
        let n = self.n;
        let mut x = vec![T::zero(); n];
        let mut next = vec![T::zero(); n];
        for k in 0..u.len() {
            visit(k, &x);
            let uk = u[k];
            let du = match (&self.g1, u.get(k + 1)) {
                (Some(_), Some(&un)) => un - uk,
                _ => T::zero(),
            };
            for i in 0..n {
                let row = &self.phi[i * n..(i + 1) * n];
                let mut acc = self.g0[i] * uk;
                for j in 0..n {
                    acc += row[j] * x[j];
                }
                if let Some(g1) = &self.g1 {
                    acc += g1[i] * du;
                }
                next[i] = acc;
            }
            std::mem::swap(&mut x, &mut next);
        }
    }
}

pub(crate) fn row_major<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Samples of `G(p) x(t_k)`: the held input is filtered in continuous time
/// from rest and read back at the same instants.
///
/// Under [`HoldType::Zoh`] this is the recursion of the step-invariant
/// equivalent of `g`. Note that cascading two calls is *not* the same as one
/// call with the product filter unless one factor is a pure gain, because the
/// intermediate signal is not piecewise constant.
pub fn filter_sampled<T: Scalar>(
    g: &CtTransferFunction<T>,
    x: &SampledSignal<T>,
    hold: HoldType,
) -> Result<SampledSignal<T>> {
    let ss = StateSpaceModel::from_ct(g);
    let d = ss.d_scalar();
    let n = ss.states();
    let xv = x.values();
    if n == 0 {
        return Ok(x.map(|v| v * d));
    }
    let c: Vec<T> = ss.c.row(0).iter().copied().collect();
    let rec = Recursion::discretize(&ss, x.h(), hold)?;
    let mut out = vec![T::zero(); xv.len()];
    rec.run(xv, |k, s| {
        let mut acc = d * xv[k];
        for j in 0..n {
            acc += c[j] * s[j];
        }
        out[k] = acc;
    });
    Ok(x.with_values(out))
}

/// Rejects holds the fast and bank paths do not implement.
pub(crate) fn require_zoh(hold: HoldType, what: &str) -> Result<()> {
    match hold {
        HoldType::Zoh => Ok(()),
        HoldType::Foh => Err(Error::Unsupported(format!(
            "{what} is implemented for zero-order hold only"
        ))),
    }
}
