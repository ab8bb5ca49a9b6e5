use nalgebra::DMatrix;
use num_complex::Complex;

use super::expm::matrix_exponential;
use super::ss::{SsDomain, StateSpaceModel};
use super::tf::{CtTransferFunction, DtTransferFunction};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cexp, lit, Scalar};

/// Step-invariant (ZOH) transition pair `(Phi, Gamma)` for `x' = A x + B u`
/// over one period `h`, from `exp([[A, B], [0, 0]] h)`.
pub fn zoh_matrices<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    h: T,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if !(h > T::zero()) {
        return Err(Error::invalid("sample period must be positive"));
    }
    let n = a.nrows();
    let k = b.ncols();
    let mut aug = DMatrix::zeros(n + k, n + k);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    aug.view_mut((0, n), (n, k)).copy_from(&(b * h));
    let e = matrix_exponential(&aug)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, k)).into_owned(),
    ))
}

/// Triangle-hold (FOH) transition triple `(Phi, Gamma0, Gamma1)` such that
/// `x_{k+1} = Phi x_k + Gamma0 u_k + Gamma1 (u_{k+1} - u_k)` for an input
/// interpolated linearly between samples.
pub fn foh_matrices<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    h: T,
) -> Result<(DMatrix<T>, DMatrix<T>, DMatrix<T>)> {
    if !(h > T::zero()) {
        return Err(Error::invalid("sample period must be positive"));
    }
    let n = a.nrows();
    let k = b.ncols();
    let mut aug = DMatrix::zeros(n + 2 * k, n + 2 * k);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    aug.view_mut((0, n), (n, k)).copy_from(&(b * h));
    let ident = DMatrix::<T>::identity(k, k) * h;
    aug.view_mut((n, n + k), (k, k)).copy_from(&ident);
    let e = matrix_exponential(&aug)?;
    let phi = e.view((0, 0), (n, n)).into_owned();
    let g0 = e.view((0, n), (n, k)).into_owned();
    // Top-right block is int_0^h e^{A s} B (h - s) ds scaled by h; divide once.
    let g1 = e.view((0, n + k), (n, k)).into_owned() / h;
    Ok((phi, g0, g1))
}

/// ZOH-discretized realization of a continuous SISO model.
pub fn c2d_ss<T: Scalar>(ss: &StateSpaceModel<T>, h: T) -> Result<StateSpaceModel<T>> {
    if ss.domain != SsDomain::Continuous {
        return Err(Error::invalid("c2d of an already discrete model"));
    }
    let (phi, gamma) = zoh_matrices(&ss.a, &ss.b, h)?;
    StateSpaceModel::new(phi, gamma, ss.c.clone(), ss.d.clone(), SsDomain::Discrete { h })
}

/// Characteristic polynomial `det(qI - M)` in descending powers of `q`
/// (Faddeev-LeVerrier).
pub fn char_poly_desc<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let mut c = vec![T::zero(); n + 1];
    c[0] = T::one();
    let ident = DMatrix::<T>::identity(n, n);
    let mut mk = DMatrix::<T>::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + &ident * c[k - 1];
        let am = m * &mk;
        c[k] = -am.trace() / lit::<T>(k as f64);
    }
    c
}

/// Exact zero-order-hold equivalent `G_d(q)` of a proper continuous-time
/// transfer function.
///
/// The numerator follows from the determinant identity
/// `C (qI - Phi)^-1 Gamma = [det(qI - Phi + Gamma C) - det(qI - Phi)] / det(qI - Phi)`.
/// Distinct continuous poles that alias onto the same discrete pole are
/// permitted and only logged.
pub fn c2d_zoh<T: Scalar>(g: &CtTransferFunction<T>, h: T) -> Result<DtTransferFunction<T>> {
    if !(h > T::zero()) {
        return Err(Error::invalid("sample period must be positive"));
    }
    if has_aliased_poles(g, h) {
        log::warn!("distinct continuous poles alias to the same discrete pole at h = {h}");
    }
    let ss = StateSpaceModel::from_ct(g);
    let n = ss.states();
    if n == 0 {
        return DtTransferFunction::gain(ss.d_scalar(), h);
    }
    let (phi, gamma) = zoh_matrices(&ss.a, &ss.b, h)?;
    let den = char_poly_desc(&phi);
    let closed = &phi - &gamma * &ss.c;
    let den_closed = char_poly_desc(&closed);
    let d = ss.d_scalar();
    let mut num: Vec<T> = den_closed
        .iter()
        .zip(&den)
        .map(|(&a, &b)| a - b + d * b)
        .collect();
    if d == T::zero() {
        num[0] = T::zero();
    }
    DtTransferFunction::new(num, den, h)
}

/// True when two poles that are distinct in continuous time map to
/// (numerically) the same discrete-time pole, i.e. their imaginary parts
/// differ by a multiple of `2 pi / h`.
pub fn has_aliased_poles<T: Scalar>(g: &CtTransferFunction<T>, h: T) -> bool {
    let poles = g.poles();
    let tol: T = lit(1e-9);
    let mapped: Vec<Complex<T>> = poles.iter().map(|p| cexp(*p * h)).collect();
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            let distinct = cabs(poles[i] - poles[j]) > tol.sqrt();
            if distinct && cabs(mapped[i] - mapped[j]) < tol.sqrt() {
                return true;
            }
        }
    }
    false
}
