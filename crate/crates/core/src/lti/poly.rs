use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, Scalar};

/// Multiplicity detection tolerance. A k-fold root computed from companion
/// eigenvalues splits by roughly `eps^(1/k)`, so roots whose separation is
/// below `sqrt(ROOT_CLUSTER_TOL)` (relative, absolute near zero) are merged.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;

/// Real polynomial in the differential operator `p`, stored in ascending
/// degree order: `coeffs[0]` is the constant term.
///
/// Trailing (highest-degree) exact zeros are trimmed on construction, so the
/// leading coefficient is nonzero unless the polynomial is identically zero,
/// which is represented as `[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Scalar"))]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
pub struct CtPolynomial<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TryFrom<Vec<T>> for CtPolynomial<T> {
    type Error = String;

    fn try_from(v: Vec<T>) -> std::result::Result<Self, String> {
        if v.iter().any(|c| !c.is_finite()) {
            return Err("polynomial coefficients must be finite".into());
        }
        Ok(CtPolynomial::new(v))
    }
}

impl<T: Scalar> From<CtPolynomial<T>> for Vec<T> {
    fn from(p: CtPolynomial<T>) -> Self {
        p.coeffs
    }
}

impl<T: Scalar> CtPolynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == T::zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        CtPolynomial { coeffs }
    }

    pub fn from_f64(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| lit(c)).collect())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// The monomial `p^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        Self::new(c)
    }

    /// Builds `lead * prod (p - root)`. Complex roots must come in conjugate
    /// pairs; imaginary residue of the expansion is discarded.
    pub fn from_roots(roots: &[Complex<T>], lead: T) -> Self {
        let mut acc: Vec<Complex<T>> = vec![Complex::new(lead, T::zero())];
        for &r in roots {
            let mut next = vec![Complex::new(T::zero(), T::zero()); acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == T::zero()
    }

    pub fn leading(&self) -> T {
        *self.coeffs.last().unwrap()
    }

    /// Coefficient of `p^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * z + Complex::new(c, T::zero())
            })
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![T::zero(); k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |m, &c| if c.abs() > m { c.abs() } else { m })
    }

    /// Rescales so that the constant term is one. When the constant term is
    /// zero (integrating denominators), the lowest-order nonzero coefficient
    /// is set to one instead.
    pub fn normalized(&self) -> Self {
        match self.coeffs.iter().find(|c| **c != T::zero()) {
            Some(&c) => self.scale(T::one() / c),
            None => self.clone(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.coeffs[0] == T::one()
    }

    /// Companion matrix of the monic version of this polynomial
    /// (last row holds the negated normalized coefficients).
    pub fn companion(&self) -> Result<DMatrix<T>> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::invalid("companion matrix of a constant polynomial"));
        }
        let lead = self.leading();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = T::one();
        }
        for j in 0..n {
            m[(n - 1, j)] = -self.coeffs[j] / lead;
        }
        Ok(m)
    }

    /// Roots as eigenvalues of the companion matrix, without polishing.
    pub fn roots(&self) -> Vec<Complex<T>> {
        match self.companion() {
            Ok(c) => c.complex_eigenvalues().iter().copied().collect(),
            Err(_) => Vec::new(),
        }
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::constant(T::zero());
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * lit::<T>(i as f64))
                .collect(),
        )
    }
}

/// Groups roots that lie within [`ROOT_CLUSTER_TOL`] of each other and
/// returns one representative (the cluster mean) with its multiplicity.
pub fn cluster_roots<T: Scalar>(roots: &[Complex<T>]) -> Vec<(Complex<T>, usize)> {
    let tol: T = lit(ROOT_CLUSTER_TOL);
    let mut clusters: Vec<(Complex<T>, Vec<Complex<T>>)> = Vec::new();
    for &r in roots {
        let scale = T::one().max(cabs(r));
        match clusters
            .iter_mut()
            .find(|(c, _)| cabs(*c - r) <= tol.sqrt() * scale)
        {
            Some((c, members)) => {
                members.push(r);
                let k: T = lit(members.len() as f64);
                *c = members
                    .iter()
                    .fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b)
                    / k;
            }
            None => clusters.push((r, vec![r])),
        }
    }
    clusters.into_iter().map(|(c, m)| (c, m.len())).collect()
}

impl<T: Scalar> fmt::Display for CtPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == T::zero() && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}p")?,
                _ => write!(f, "{c}p^{i}")?,
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Add for &CtPolynomial<T> {
    type Output = CtPolynomial<T>;

    fn add(self, rhs: Self) -> CtPolynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CtPolynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &CtPolynomial<T> {
    type Output = CtPolynomial<T>;

    fn sub(self, rhs: Self) -> CtPolynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CtPolynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &CtPolynomial<T> {
    type Output = CtPolynomial<T>;

    fn mul(self, rhs: Self) -> CtPolynomial<T> {
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CtPolynomial::new(out)
    }
}

impl<T: Scalar> Neg for &CtPolynomial<T> {
    type Output = CtPolynomial<T>;

    fn neg(self) -> CtPolynomial<T> {
        self.scale(-T::one())
    }
}
