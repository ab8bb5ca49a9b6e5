use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Padé(13) numerator/denominator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant is accurate to double
/// precision without scaling.
const THETA13: f64 = 5.371920351148152;

fn norm1<T: Scalar>(m: &DMatrix<T>) -> T {
    (0..m.ncols())
        .map(|j| m.column(j).iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Matrix exponential by scaling and squaring with a fixed degree-13 Padé
/// approximant.
pub fn matrix_exponential<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "matrix exponential of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix exponential of a non-finite matrix"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let nrm = crate::scalar::to_f64(norm1(m));
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * lit::<T>(0.5f64.powi(s));

    let b: Vec<T> = PADE13.iter().map(|&c| lit(c)).collect();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::invalid("singular Padé denominator in matrix exponential"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_identity() {
        let e = matrix_exponential(&DMatrix::<f64>::zeros(3, 3)).unwrap();
        assert_eq!(e, DMatrix::identity(3, 3));
    }

    #[test]
    fn diagonal_case() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let e = matrix_exponential(&m).unwrap();
        assert!((e[(0, 0)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matrix_exponential(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn scaling_and_squaring_large_norm() {
        // exp of [[0, w], [-w, 0]] is a rotation.
        let w = 40.0f64;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, w, -w, 0.0]);
        let e = matrix_exponential(&m).unwrap();
        assert!((e[(0, 0)] - w.cos()).abs() < 1e-11);
        assert!((e[(0, 1)] - w.sin()).abs() < 1e-11);
    }

    #[test]
    fn single_precision() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0f32, 0.5, 0.0, -2.0]);
        let e = matrix_exponential(&m).unwrap();
        assert!((e[(0, 0)] - (-1.0f32).exp()).abs() < 1e-6);
    }
}
