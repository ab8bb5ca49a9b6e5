use num_complex::Complex;

use crate::error::{fmt_roots, Error, Result};
use crate::lti::{stability_check, stability_check_ct, StabilityDomain};
use crate::theta::ThetaVector;
use crate::CtPoly;

/// Smallest distance from the stability boundary a reflected root keeps.
const MIN_MARGIN: f64 = 1e-8;

/// Returns a stable-denominator version of `theta` and whether anything
/// changed.
///
/// Roots of `A(p)` with non-negative real part are mirrored across the
/// imaginary axis, which leaves `|A(iw)|` unchanged; the polynomial is then
/// rescaled to unit constant term together with `B`. Already-stable input
/// is returned untouched.
pub fn project_stable(theta: &ThetaVector) -> (ThetaVector, bool) {
    let a = theta.den();
    if stability_check_ct(&a).stable {
        return (theta.clone(), false);
    }
    let roots: Vec<Complex<f64>> = a
        .roots()
        .into_iter()
        .map(|r| Complex::new(-r.re.abs().max(MIN_MARGIN), r.im))
        .collect();
    let reflected = CtPoly::from_roots(&roots, a.leading());
    let c0 = reflected.coeff(0);
    let an: Vec<f64> = (1..=theta.n()).map(|i| reflected.coeff(i) / c0).collect();
    let bn: Vec<f64> = theta.b.iter().map(|b| b / c0).collect();
    (ThetaVector { a: an, b: bn }, true)
}

/// Mirrors the unstable roots of a polynomial (continuous: across the
/// imaginary axis; discrete: through the unit circle), keeping the leading
/// coefficient. Returns `None` when nothing had to change.
pub(crate) fn reflect_polynomial(poly: &CtPoly, domain: StabilityDomain) -> Option<CtPoly> {
    let rep = stability_check(poly, domain);
    if rep.stable {
        return None;
    }
    let roots: Vec<Complex<f64>> = rep
        .roots
        .iter()
        .map(|&r| match domain {
            StabilityDomain::Continuous => Complex::new(-r.re.abs().max(MIN_MARGIN), r.im),
            StabilityDomain::Discrete => {
                let m = r.norm();
                if m >= 1.0 - MIN_MARGIN {
                    let s = (1.0 / m).min(1.0 - MIN_MARGIN);
                    Complex::from_polar(s, r.arg())
                } else {
                    r
                }
            }
        })
        .collect();
    Some(CtPoly::from_roots(&roots, poly.leading()))
}

/// Stabilizes the instrument prefilter denominator or aborts, according to
/// the configured policy.
pub(crate) fn stabilize_prefilter(
    den: &CtPoly,
    domain: StabilityDomain,
    reflect: bool,
) -> Result<(CtPoly, bool)> {
    match reflect_polynomial(den, domain) {
        None => Ok((den.clone(), false)),
        Some(p) if reflect => {
            log::warn!("model closed loop unstable; reflecting prefilter poles");
            Ok((p, true))
        }
        Some(_) => {
            let rep = stability_check(den, domain);
            Err(Error::ModelClosedLoopUnstable {
                roots: fmt_roots(&rep.unstable_roots),
            })
        }
    }
}
