use nalgebra::DMatrix;

use super::poly::CtPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Relative-determinant threshold below which a pair is reported as
/// numerically non-coprime.
pub const COPRIME_TOL: f64 = 1e-10;

/// Square `(n+m+1)` matrix mapping the stacked derivative bank
/// `[p^{n+m}, ..., p, 1] x` onto the columns of an `(n, m)` regressor.
///
/// Rows `0..n` carry the coefficients of `p^i * p2` for `i = 1..n`, rows
/// `n..n+m+1` those of `p^k * p1` for `k = 0..m`. Columns are indexed by
/// descending degree `n+m, ..., 0`. With `p1 = A`, `p2 = -B` the product with
/// a bank driven through `1/A^2` reproduces the noise-free regressor
/// `[-p^i y/A, p^k u/A]`.
///
/// Sign convention: `det(S) = (-1)^{n(n-1)/2 + m(m+1)/2} Res(p * p2, p1)`,
/// the classical resultant of `p * p2` (formal degree `m+1`) and `p1` (formal
/// degree `n`). Because `p1(0) != 0` for a normalized denominator, `S` is
/// singular exactly when `p1` and `p2` share a root.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterMatrix<T: Scalar> {
    entries: DMatrix<T>,
    p1: CtPolynomial<T>,
    p2: CtPolynomial<T>,
    n: usize,
    m: usize,
}

pub fn build_sylvester<T: Scalar>(
    p1: &CtPolynomial<T>,
    p2: &CtPolynomial<T>,
    n: usize,
    m: usize,
) -> Result<SylvesterMatrix<T>> {
    if p1.degree() > n || p2.degree() > m {
        return Err(Error::invalid(format!(
            "polynomial degrees ({}, {}) exceed the Sylvester sizes (n, m) = ({n}, {m})",
            p1.degree(),
            p2.degree()
        )));
    }
    let size = n + m + 1;
    let top = n + m;
    let mut s = DMatrix::zeros(size, size);
    let mut put = |row: usize, poly: &CtPolynomial<T>, shift: usize| {
        for (deg, &c) in poly.coeffs().iter().enumerate() {
            let d = deg + shift;
            if c != T::zero() {
                s[(row, top - d)] = c;
            }
        }
    };
    for i in 1..=n {
        put(i - 1, p2, i);
    }
    for k in 0..=m {
        put(n + k, p1, k);
    }
    Ok(SylvesterMatrix {
        entries: s,
        p1: p1.clone(),
        p2: p2.clone(),
        n,
        m,
    })
}

impl<T: Scalar> SylvesterMatrix<T> {
    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn built_from(&self) -> (&CtPolynomial<T>, &CtPolynomial<T>) {
        (&self.p1, &self.p2)
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn determinant(&self) -> T {
        self.entries.clone().lu().determinant()
    }

    /// `(-1)^{n(n-1)/2 + m(m+1)/2}`, relating the determinant to the resultant.
    pub fn resultant_sign(&self) -> T {
        let e = self.n * (self.n.saturating_sub(1)) / 2 + self.m * (self.m + 1) / 2;
        if e % 2 == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Determinant divided by the product of row norms (Hadamard bound), in
    /// `[0, 1]` and independent of coefficient scaling.
    pub fn relative_determinant(&self) -> T {
        let mut bound = T::one();
        for r in self.entries.row_iter() {
            bound *= r.norm();
        }
        if bound == T::zero() {
            return T::zero();
        }
        self.determinant().abs() / bound
    }

    pub fn is_coprime(&self) -> bool {
        self.relative_determinant() > lit(COPRIME_TOL)
    }
}
