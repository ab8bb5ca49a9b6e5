use nalgebra::DMatrix;

use super::tf::{CtTransferFunction, DtTransferFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SsDomain<T> {
    Continuous,
    Discrete { h: T },
}

/// State-space realization `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
    pub domain: SsDomain<T>,
}

impl<T: Scalar> StateSpaceModel<T> {
    pub fn new(
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
        domain: SsDomain<T>,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square()
            || b.nrows() != n
            || c.ncols() != n
            || d.nrows() != c.nrows()
            || d.ncols() != b.ncols()
        {
            return Err(Error::invalid(format!(
                "inconsistent state-space dimensions A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(StateSpaceModel { a, b, c, d, domain })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    /// Controllable canonical (companion) realization of a proper
    /// continuous-time transfer function. State `i` is the `i`-th derivative
    /// of `u / A(p)`.
    pub fn from_ct(tf: &CtTransferFunction<T>) -> Self {
        let (a, b, c, d) = companion_realization(tf.num().coeffs(), tf.den().coeffs());
        StateSpaceModel {
            a,
            b,
            c,
            d,
            domain: SsDomain::Continuous,
        }
    }

    /// Controllable canonical realization of a discrete-time transfer function.
    pub fn from_dt(tf: &DtTransferFunction<T>) -> Self {
        let num: Vec<T> = tf.num().iter().rev().copied().collect();
        let den: Vec<T> = tf.den().iter().rev().copied().collect();
        let (a, b, c, d) = companion_realization(&num, &den);
        StateSpaceModel {
            a,
            b,
            c,
            d,
            domain: SsDomain::Discrete {
                h: tf.sample_period(),
            },
        }
    }

    /// SISO feedthrough scalar.
    pub fn d_scalar(&self) -> T {
        self.d[(0, 0)]
    }
}

/// Companion realization from ascending numerator/denominator coefficients
/// (`num.len() <= den.len()`).
fn companion_realization<T: Scalar>(
    num: &[T],
    den: &[T],
) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>, DMatrix<T>) {
    let n = den.len() - 1;
    let lead = den[n];
    let alpha: Vec<T> = den.iter().map(|&c| c / lead).collect();
    let beta: Vec<T> = (0..=n)
        .map(|i| num.get(i).copied().unwrap_or_else(T::zero) / lead)
        .collect();
    let dval = beta[n];
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = T::one();
    }
    for j in 0..n {
        a[(n - 1, j)] = -alpha[j];
    }
    let mut b = DMatrix::zeros(n, 1);
    if n > 0 {
        b[(n - 1, 0)] = T::one();
    }
    let mut c = DMatrix::zeros(1, n);
    for j in 0..n {
        c[(0, j)] = beta[j] - dval * alpha[j];
    }
    let d = DMatrix::from_element(1, 1, dval);
    (a, b, c, d)
}
