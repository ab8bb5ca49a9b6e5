use nalgebra::DMatrix;

use super::filter::{require_zoh, HoldType, Recursion};
use super::signal::SampledSignal;
use crate::error::{Error, Result};
use crate::lti::{stability_check_ct, CtPolynomial, CtTransferFunction, StateSpaceModel};
use crate::scalar::Scalar;

/// Filtered derivatives `p^i / A(p) x(t_k)`, `i = 0..=max_order`.
///
/// Stored column-major with one column per sample, so that the vector of all
/// orders at a given instant is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBankOutput<T: Scalar> {
    rows: DMatrix<T>,
}

impl<T: Scalar> DerivativeBankOutput<T> {
    pub(crate) fn from_matrix(rows: DMatrix<T>) -> Self {
        DerivativeBankOutput { rows }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.rows
    }

    pub fn orders(&self) -> usize {
        self.rows.nrows()
    }

    pub fn len(&self) -> usize {
        self.rows.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.ncols() == 0
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.rows.row(i).iter().copied().collect()
    }

    /// All filtered orders `[p^0/A, ..., p^max/A] x` at sample `k`.
    pub fn at(&self, k: usize) -> &[T] {
        let d = self.rows.nrows();
        &self.rows.as_slice()[k * d..(k + 1) * d]
    }

    /// `sum_i a_i (p^i/A) x (t_k)`: should reproduce the input sample.
    pub fn apply_polynomial(&self, a: &CtPolynomial<T>) -> Vec<T> {
        (0..self.len())
            .map(|k| {
                self.at(k)
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, &v)| acc + a.coeff(i) * v)
            })
            .collect()
    }
}

/// Shared realization for both slow-rate and lifted banks: the companion
/// form of `1/A` whose states are `p^i/A x`, scaled by the leading
/// coefficient.
pub(crate) struct BankRealization<T: Scalar> {
    pub ss: StateSpaceModel<T>,
    pub a: CtPolynomial<T>,
    pub max_order: usize,
}

impl<T: Scalar> BankRealization<T> {
    pub fn new(a: &CtPolynomial<T>, max_order: usize) -> Result<Self> {
        let n = a.degree();
        if max_order > n {
            return Err(Error::invalid(format!(
                "derivative order {max_order} exceeds the filter degree {n}"
            )));
        }
        if a.is_zero() {
            return Err(Error::invalid("derivative bank of the zero polynomial"));
        }
        stability_check_ct(a).require("derivative-bank denominator")?;
        let g = CtTransferFunction::new(CtPolynomial::one(), a.clone())?;
        Ok(BankRealization {
            ss: StateSpaceModel::from_ct(&g),
            a: g.den().clone(),
            max_order,
        })
    }

    /// Fills the bank column for instant `k` from the companion state at
    /// `t_k` and the current input sample.
    #[inline]
    pub fn emit(&self, state: &[T], xk: T, col: &mut [T]) {
        let n = self.a.degree();
        let lead = self.a.leading();
        let lim = self.max_order.min(n.saturating_sub(1));
        if n > 0 {
            for i in 0..=lim {
                col[i] = state[i] / lead;
            }
        }
        if self.max_order == n {
            let mut acc = xk;
            for i in 0..n {
                acc -= self.a.coeff(i) * state[i] / lead;
            }
            col[n] = acc / lead;
        }
    }
}

/// Filtered derivatives `p^i/A(p) x(t_k)` for `i = 0..=max_order`, from a
/// single discretization of the companion realization of `1/A`.
///
/// Orders below `n = deg A` are read from the state; order `n` uses the state
/// equation `p^n/A = (1 - sum_{i<n} a_i p^i/A) / a_n`, so `A(p)` applied
/// across the rows reproduces the input. Zero-order hold only; `a` must be
/// stable.
pub fn derivative_bank<T: Scalar>(
    a: &CtPolynomial<T>,
    x: &SampledSignal<T>,
    hold: HoldType,
    max_order: usize,
) -> Result<DerivativeBankOutput<T>> {
    require_zoh(hold, "the derivative bank")?;
    let real = BankRealization::new(a, max_order)?;
    let rows_n = max_order + 1;
    let xv = x.values();
    let mut rows = DMatrix::zeros(rows_n, xv.len());
    let buf = rows.as_mut_slice();
    if real.ss.states() == 0 {
        for (k, &v) in xv.iter().enumerate() {
            real.emit(&[], v, &mut buf[k * rows_n..(k + 1) * rows_n]);
        }
    } else {
        let rec = Recursion::discretize(&real.ss, x.h(), HoldType::Zoh)?;
        rec.run(xv, |k, s| real.emit(s, xv[k], &mut buf[k * rows_n..(k + 1) * rows_n]));
    }
    Ok(DerivativeBankOutput { rows })
}
