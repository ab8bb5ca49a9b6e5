use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::CtPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Wire domain tag of a serialized transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfDomain {
    Continuous,
    Discrete,
}

/// JSON/TOML form shared by both transfer function types:
/// `{num: [...], den: [...], domain, h}` in the stored coefficient order
/// (ascending powers of `p`, descending powers of `q`).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TfWire<T> {
    num: Vec<T>,
    den: Vec<T>,
    domain: TfDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<T>,
}

/// Continuous-time rational transfer function `B(p)/A(p)`.
///
/// The denominator is normalized on construction (constant term one, or the
/// lowest nonzero coefficient one for integrating denominators) and the model
/// must be proper.
#[derive(Debug, Clone, PartialEq)]
pub struct CtTransferFunction<T: Scalar> {
    num: CtPolynomial<T>,
    den: CtPolynomial<T>,
}

impl<T: Scalar> CtTransferFunction<T> {
    pub fn new(num: CtPolynomial<T>, den: CtPolynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        if num.degree() > den.degree() && !num.is_zero() {
            return Err(Error::Improper {
                num: num.degree(),
                den: den.degree(),
            });
        }
        let scale = den
            .coeffs()
            .iter()
            .copied()
            .find(|c| *c != T::zero())
            .unwrap();
        let inv = T::one() / scale;
        Ok(CtTransferFunction {
            num: num.scale(inv),
            den: den.scale(inv),
        })
    }

    pub fn from_f64(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(CtPolynomial::from_f64(num), CtPolynomial::from_f64(den))
    }

    pub fn gain(k: T) -> Self {
        CtTransferFunction {
            num: CtPolynomial::constant(k),
            den: CtPolynomial::one(),
        }
    }

    pub fn num(&self) -> &CtPolynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &CtPolynomial<T> {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Feedthrough term (value at infinite frequency).
    pub fn feedthrough(&self) -> T {
        if self.is_strictly_proper() {
            T::zero()
        } else {
            self.num.leading() / self.den.leading()
        }
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn dc_gain(&self) -> T {
        self.num.eval(T::zero()) / self.den.eval(T::zero())
    }

    pub fn poles(&self) -> Vec<Complex<T>> {
        self.den.roots()
    }

    pub fn series(&self, other: &Self) -> Result<Self> {
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }

    /// Multiplies numerator and denominator by extra polynomial factors,
    /// e.g. `p^i / A_j(p)` times `self`.
    pub fn with_factors(&self, num: &CtPolynomial<T>, den: &CtPolynomial<T>) -> Result<Self> {
        Self::new(&self.num * num, &self.den * den)
    }

    pub fn scale(&self, k: T) -> Self {
        CtTransferFunction {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// Characteristic polynomial `A L + B F` of the loop `plant`/`ctrl`.
    pub fn loop_characteristic(plant: &Self, ctrl: &Self) -> CtPolynomial<T> {
        &(&plant.den * &ctrl.den) + &(&plant.num * &ctrl.num)
    }

    /// Control sensitivity `C / (1 + G C)`.
    pub fn control_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        Self::new(&ctrl.num * &plant.den, Self::loop_characteristic(plant, ctrl))
    }

    /// Complementary sensitivity `G C / (1 + G C)`.
    pub fn complementary_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        Self::new(&ctrl.num * &plant.num, Self::loop_characteristic(plant, ctrl))
    }

    /// Output sensitivity `1 / (1 + G C)`.
    pub fn output_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        Self::new(&ctrl.den * &plant.den, Self::loop_characteristic(plant, ctrl))
    }
}

impl<T: Scalar> fmt::Display for CtTransferFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl<T: Scalar + Serialize> Serialize for CtTransferFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TfWire {
            num: self.num.coeffs().to_vec(),
            den: self.den.coeffs().to_vec(),
            domain: TfDomain::Continuous,
            h: None,
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for CtTransferFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = TfWire::<T>::deserialize(d)?;
        if w.domain != TfDomain::Continuous {
            return Err(serde::de::Error::custom(
                "expected a continuous-domain transfer function",
            ));
        }
        CtTransferFunction::new(CtPolynomial::new(w.num), CtPolynomial::new(w.den))
            .map_err(serde::de::Error::custom)
    }
}

/// Discrete-time rational transfer function in the forward shift `q`.
///
/// Coefficients are stored in *descending* powers of `q`; the denominator is
/// monic after construction and the numerator is never longer than the
/// denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct DtTransferFunction<T: Scalar> {
    num: Vec<T>,
    den: Vec<T>,
    h: T,
}

fn trim_leading<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    let first = v.iter().position(|c| *c != T::zero()).unwrap_or(v.len());
    v.drain(..first);
    if v.is_empty() {
        v.push(T::zero());
    }
    v
}

fn desc_to_poly<T: Scalar>(v: &[T]) -> CtPolynomial<T> {
    CtPolynomial::new(v.iter().rev().copied().collect())
}

fn poly_to_desc<T: Scalar>(p: &CtPolynomial<T>) -> Vec<T> {
    p.coeffs().iter().rev().copied().collect()
}

impl<T: Scalar> DtTransferFunction<T> {
    pub fn new(num: Vec<T>, den: Vec<T>, h: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::invalid("sample period must be positive"));
        }
        let num = trim_leading(num);
        let den = trim_leading(den);
        if den.len() == 1 && den[0] == T::zero() {
            return Err(Error::invalid("zero denominator"));
        }
        let num_is_zero = num.len() == 1 && num[0] == T::zero();
        if num.len() > den.len() && !num_is_zero {
            return Err(Error::Improper {
                num: num.len() - 1,
                den: den.len() - 1,
            });
        }
        let lead = den[0];
        Ok(DtTransferFunction {
            num: num.iter().map(|&c| c / lead).collect(),
            den: den.iter().map(|&c| c / lead).collect(),
            h,
        })
    }

    pub fn from_f64(num: &[f64], den: &[f64], h: f64) -> Result<Self> {
        Self::new(
            num.iter().map(|&c| lit(c)).collect(),
            den.iter().map(|&c| lit(c)).collect(),
            lit(h),
        )
    }

    pub fn gain(k: T, h: T) -> Result<Self> {
        Self::new(vec![k], vec![T::one()], h)
    }

    pub fn num(&self) -> &[T] {
        &self.num
    }

    pub fn den(&self) -> &[T] {
        &self.den
    }

    pub fn sample_period(&self) -> T {
        self.h
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    /// Denominator as a polynomial in `q` (ascending storage).
    pub fn den_poly(&self) -> CtPolynomial<T> {
        desc_to_poly(&self.den)
    }

    pub fn num_poly(&self) -> CtPolynomial<T> {
        desc_to_poly(&self.num)
    }

    fn from_polys(num: CtPolynomial<T>, den: CtPolynomial<T>, h: T) -> Result<Self> {
        Self::new(poly_to_desc(&num), poly_to_desc(&den), h)
    }

    pub fn is_strictly_proper(&self) -> bool {
        let num_is_zero = self.num.iter().all(|c| *c == T::zero());
        num_is_zero || self.num.len() < self.den.len()
    }

    pub fn feedthrough(&self) -> T {
        if self.is_strictly_proper() {
            T::zero()
        } else {
            self.num[0]
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.num_poly().eval_complex(z) / self.den_poly().eval_complex(z)
    }

    pub fn dc_gain(&self) -> T {
        let one = T::one();
        self.num_poly().eval(one) / self.den_poly().eval(one)
    }

    pub fn poles(&self) -> Vec<Complex<T>> {
        self.den_poly().roots()
    }

    fn check_period(&self, other: &Self) -> Result<()> {
        let tol: T = lit(1e-12);
        if (self.h - other.h).abs() > tol * self.h {
            return Err(Error::invalid("sample periods of discrete systems differ"));
        }
        Ok(())
    }

    pub fn series(&self, other: &Self) -> Result<Self> {
        self.check_period(other)?;
        Self::from_polys(
            &self.num_poly() * &other.num_poly(),
            &self.den_poly() * &other.den_poly(),
            self.h,
        )
    }

    /// Sum `self + other`.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        self.check_period(other)?;
        let (n1, d1) = (self.num_poly(), self.den_poly());
        let (n2, d2) = (other.num_poly(), other.den_poly());
        Self::from_polys(&(&n1 * &d2) + &(&n2 * &d1), &d1 * &d2, self.h)
    }

    pub fn scale(&self, k: T) -> Self {
        DtTransferFunction {
            num: self.num.iter().map(|&c| c * k).collect(),
            den: self.den.clone(),
            h: self.h,
        }
    }

    /// `-1 / self`, used as the low-SNR bias target `-1/C_d(q)`.
    pub fn negative_inverse(&self) -> Result<Self> {
        Self::from_polys(-&self.den_poly(), self.num_poly(), self.h)
    }

    pub fn loop_characteristic(plant: &Self, ctrl: &Self) -> CtPolynomial<T> {
        &(&plant.den_poly() * &ctrl.den_poly()) + &(&plant.num_poly() * &ctrl.num_poly())
    }

    /// Control sensitivity `C_d / (1 + G_d C_d)`.
    pub fn control_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        plant.check_period(ctrl)?;
        Self::from_polys(
            &ctrl.num_poly() * &plant.den_poly(),
            Self::loop_characteristic(plant, ctrl),
            plant.h,
        )
    }

    pub fn complementary_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        plant.check_period(ctrl)?;
        Self::from_polys(
            &ctrl.num_poly() * &plant.num_poly(),
            Self::loop_characteristic(plant, ctrl),
            plant.h,
        )
    }

    pub fn output_sensitivity(plant: &Self, ctrl: &Self) -> Result<Self> {
        plant.check_period(ctrl)?;
        Self::from_polys(
            &ctrl.den_poly() * &plant.den_poly(),
            Self::loop_characteristic(plant, ctrl),
            plant.h,
        )
    }

    /// Runs the difference equation over `x` from rest
    /// (transposed direct form II).
    pub fn filter(&self, x: &[T]) -> Vec<T> {
        let n = self.order();
        let mut b = vec![T::zero(); n + 1 - self.num.len()];
        b.extend_from_slice(&self.num);
        let a = &self.den;
        let mut s = vec![T::zero(); n + 1];
        let mut y = Vec::with_capacity(x.len());
        for &xk in x {
            let yk = b[0] * xk + s[0];
            for i in 0..n {
                s[i] = b[i + 1] * xk - a[i + 1] * yk + s[i + 1];
            }
            y.push(yk);
        }
        y
    }
}

impl<T: Scalar + Serialize> Serialize for DtTransferFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TfWire {
            num: self.num.clone(),
            den: self.den.clone(),
            domain: TfDomain::Discrete,
            h: Some(self.h),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for DtTransferFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = TfWire::<T>::deserialize(d)?;
        if w.domain != TfDomain::Discrete {
            return Err(serde::de::Error::custom(
                "expected a discrete-domain transfer function",
            ));
        }
        let h = w
            .h
            .ok_or_else(|| serde::de::Error::custom("discrete transfer function needs h"))?;
        DtTransferFunction::new(w.num, w.den, h).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ct_normalizes_constant_term() {
        let g = CtTransferFunction::<f64>::from_f64(&[1.0], &[2.0, 1.0]).unwrap();
        assert_eq!(g.den().coeffs(), &[1.0, 0.5]);
        assert_eq!(g.num().coeffs(), &[0.5]);
    }

    #[test]
    fn ct_rejects_improper() {
        assert!(matches!(
            CtTransferFunction::<f64>::from_f64(&[0.0, 0.0, 1.0], &[1.0, 1.0]),
            Err(Error::Improper { .. })
        ));
    }

    #[test]
    fn dt_monic_and_proper() {
        let g = DtTransferFunction::<f64>::from_f64(&[0.0, 1.0], &[2.0, -1.0], 0.1).unwrap();
        assert_eq!(g.den(), &[1.0, -0.5]);
        assert_eq!(g.num(), &[0.5]);
        assert!(DtTransferFunction::<f64>::from_f64(&[1.0, 0.0, 0.0], &[1.0, 0.5], 0.1).is_err());
        assert!(DtTransferFunction::<f64>::from_f64(&[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn dt_filter_first_order() {
        // y_k = 0.5 y_{k-1} + x_{k-1}
        let g = DtTransferFunction::<f64>::from_f64(&[1.0], &[1.0, -0.5], 0.1).unwrap();
        let y = g.filter(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(y, vec![0.0, 1.0, 0.5, 0.25]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = CtTransferFunction::<f64>::from_f64(&[0.5, -0.25], &[1.0, 0.707, 0.5]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"domain\":\"continuous\""));
        let back: CtTransferFunction<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);

        let c = DtTransferFunction::<f64>::from_f64(&[0.416, -0.416 * 0.7452], &[1.0, -1.0], 0.1)
            .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: DtTransferFunction<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<CtTransferFunction<f64>>(&s).is_err());
    }

    #[test]
    fn negative_inverse() {
        let c = DtTransferFunction::<f64>::from_f64(&[2.0, -1.0], &[1.0, -1.0], 0.1).unwrap();
        let t = c.negative_inverse().unwrap();
        let z = Complex::new(0.3, 0.4);
        let lhs = t.eval(z);
        let rhs = -Complex::new(1.0, 0.0) / c.eval(z);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
