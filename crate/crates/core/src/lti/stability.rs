use num_complex::Complex;

use super::poly::CtPolynomial;
use super::tf::DtTransferFunction;
use crate::error::{fmt_roots, Error, Result};
use crate::scalar::{cabs, lit, to_f64, Scalar};

/// Roots closer than this to the stability boundary are reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityDomain {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T: Scalar> {
    pub stable: bool,
    /// Roots on or outside the boundary (marginal roots included).
    pub unstable_roots: Vec<Complex<T>>,
    /// At least one root lies on the boundary within [`MARGINAL_TOL`].
    pub marginal: bool,
    /// The polynomial was constant; reported stable.
    pub trivial: bool,
    pub roots: Vec<Complex<T>>,
}

impl<T: Scalar> StabilityReport<T> {
    /// Turns an unstable report into an error, naming the offending object.
    pub fn require(&self, what: &str) -> Result<()> {
        if self.stable {
            Ok(())
        } else {
            Err(Error::Unstable {
                what: what.to_string(),
                roots: fmt_roots(&self.unstable_roots),
            })
        }
    }
}

/// Root-location test for `poly`, read as a polynomial in `p` (continuous) or
/// in `q` (discrete; coefficients still ascending).
pub fn stability_check<T: Scalar>(
    poly: &CtPolynomial<T>,
    domain: StabilityDomain,
) -> StabilityReport<T> {
    if poly.degree() == 0 {
        return StabilityReport {
            stable: true,
            unstable_roots: Vec::new(),
            marginal: false,
            trivial: true,
            roots: Vec::new(),
        };
    }
    let roots = poly.roots();
    let tol: T = lit(MARGINAL_TOL);
    let mut unstable = Vec::new();
    let mut marginal = false;
    for r in &roots {
        let margin = match domain {
            StabilityDomain::Continuous => -r.re,
            StabilityDomain::Discrete => T::one() - cabs(*r),
        };
        if margin.abs() <= tol {
            marginal = true;
        }
        if margin <= tol {
            unstable.push(*r);
        }
    }
    StabilityReport {
        stable: unstable.is_empty(),
        unstable_roots: unstable,
        marginal,
        trivial: false,
        roots,
    }
}

pub fn stability_check_ct<T: Scalar>(poly: &CtPolynomial<T>) -> StabilityReport<T> {
    stability_check(poly, StabilityDomain::Continuous)
}

/// Stability of a discrete transfer function's denominator.
pub fn stability_check_dt<T: Scalar>(g: &DtTransferFunction<T>) -> StabilityReport<T> {
    stability_check(&g.den_poly(), StabilityDomain::Discrete)
}

/// Largest real part among the roots (continuous) — the slowest decay rate
/// when negative.
pub fn spectral_abscissa<T: Scalar>(poly: &CtPolynomial<T>) -> Option<f64> {
    poly.roots()
        .iter()
        .map(|r| to_f64(r.re))
        .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_system_denominator_is_stable() {
        let a = CtPolynomial::<f64>::from_f64(&[1.0, 0.707, 0.5]);
        let r = stability_check_ct(&a);
        assert!(r.stable && !r.marginal && !r.trivial);
        assert_eq!(r.roots.len(), 2);
    }

    #[test]
    fn unstable_first_order() {
        let a = CtPolynomial::<f64>::from_f64(&[-1.0, 1.0]);
        let r = stability_check_ct(&a);
        assert!(!r.stable);
        assert_eq!(r.unstable_roots.len(), 1);
        assert!((r.unstable_roots[0].re - 1.0).abs() < 1e-14);
        assert!(r.require("test").is_err());
    }

    #[test]
    fn discrete_integrator_is_marginal() {
        let g = DtTransferFunction::<f64>::from_f64(&[1.0], &[1.0, -1.0], 0.1).unwrap();
        let r = stability_check_dt(&g);
        assert!(!r.stable);
        assert!(r.marginal);
    }

    #[test]
    fn constant_is_trivially_stable() {
        let r = stability_check_ct(&CtPolynomial::<f64>::constant(2.0));
        assert!(r.stable && r.trivial);
    }
}
