use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CtPoly, CtTf};

/// Model parameters `[a_1, ..., a_n, b_0, ..., b_m]` of
/// `G(p) = (b_m p^m + ... + b_0) / (a_n p^n + ... + a_1 p + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ThetaVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("numerator needs at least b_0"));
        }
        Ok(ThetaVector { a, b })
    }

    /// Splits a stacked vector according to the orders `(n, m)`.
    pub fn from_slice(v: &[f64], n: usize, m: usize) -> Result<Self> {
        if v.len() != n + m + 1 {
            return Err(Error::invalid(format!(
                "parameter vector has {} entries, orders ({n}, {m}) need {}",
                v.len(),
                n + m + 1
            )));
        }
        Ok(ThetaVector {
            a: v[..n].to_vec(),
            b: v[n..].to_vec(),
        })
    }

    /// Parameters of a transfer function at the given orders (zero padded).
    pub fn from_tf(g: &CtTf, n: usize, m: usize) -> Result<Self> {
        let den = g.den();
        if den.coeff(0) != 1.0 {
            return Err(Error::invalid(
                "denominator has no unit constant term (integrating model)",
            ));
        }
        if den.degree() > n || g.num().degree() > m {
            return Err(Error::invalid(format!(
                "transfer function {g} does not fit orders ({n}, {m})"
            )));
        }
        Ok(ThetaVector {
            a: (1..=n).map(|i| den.coeff(i)).collect(),
            b: (0..=m).map(|k| g.num().coeff(k)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.b.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `A(p) = 1 + a_1 p + ... + a_n p^n`.
    pub fn den(&self) -> CtPoly {
        let mut c = Vec::with_capacity(self.n() + 1);
        c.push(1.0);
        c.extend_from_slice(&self.a);
        CtPoly::new(c)
    }

    pub fn num(&self) -> CtPoly {
        CtPoly::new(self.b.clone())
    }

    pub fn tf(&self) -> Result<CtTf> {
        CtTf::new(self.num(), self.den())
    }

    /// Parameter labels in stacking order.
    pub fn labels(n: usize, m: usize) -> Vec<String> {
        (1..=n)
            .map(|i| format!("a{i}"))
            .chain((0..=m).map(|k| format!("b{k}")))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ThetaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_vec().iter().map(|x| format!("{x:.6}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_transfer_function() {
        let th = ThetaVector::new(vec![0.707, 0.5], vec![0.5, -0.25]).unwrap();
        let g = th.tf().unwrap();
        assert_eq!(ThetaVector::from_tf(&g, 2, 1).unwrap(), th);
        assert_eq!(th.to_vec(), vec![0.707, 0.5, 0.5, -0.25]);
        assert_eq!(ThetaVector::labels(2, 1), vec!["a1", "a2", "b0", "b1"]);
    }

    #[test]
    fn pads_lower_orders() {
        let g = CtTf::from_f64(&[2.0], &[1.0, 3.0]).unwrap();
        let th = ThetaVector::from_tf(&g, 2, 1).unwrap();
        assert_eq!(th.to_vec(), vec![3.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(ThetaVector::from_slice(&[1.0, 2.0], 2, 1).is_err());
    }
}
