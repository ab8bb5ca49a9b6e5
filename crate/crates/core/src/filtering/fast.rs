use nalgebra::DMatrix;

use super::bank::{derivative_bank, BankRealization, DerivativeBankOutput};
use super::filter::{filter_sampled, require_zoh, row_major, HoldType};
use super::signal::SampledSignal;
use crate::error::{Error, Result};
use crate::lti::{zoh_matrices, CtPolynomial, CtTransferFunction, StateSpaceModel};
use crate::scalar::{lit, Scalar};

/// Checks that a fast grid at `h/m` and a slow grid of `slow_len` samples at
/// `h` share their first instant and that every slow instant is a fast one.
pub fn check_alignment(fast_len: usize, slow_len: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("oversampling factor must be at least 1"));
    }
    let want = if slow_len == 0 { 0 } else { m * (slow_len - 1) + 1 };
    if fast_len != want {
        return Err(Error::Misaligned(format!(
            "fast signal has {fast_len} samples, expected {want} = {m} x ({slow_len} - 1) + 1"
        )));
    }
    Ok(())
}

fn slow_len(fast_len: usize, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::invalid("oversampling factor must be at least 1"));
    }
    if fast_len == 0 {
        return Ok(0);
    }
    if (fast_len - 1) % m != 0 {
        return Err(Error::Misaligned(format!(
            "fast signal length {fast_len} is not of the form {m} (N - 1) + 1"
        )));
    }
    Ok((fast_len - 1) / m + 1)
}

/// Fast-rate ZOH recursion evaluated only at every `m`-th instant:
/// `z_{k+1} = Phi^m z_k + sum_j Phi^{m-1-j} Gamma x_fast[k m + j]`.
struct Lifted<T: Scalar> {
    n: usize,
    m: usize,
    phi_m: Vec<T>,
    /// Row-major `n x m`; column `j` is `Phi^{m-1-j} Gamma`.
    kmat: Vec<T>,
}

impl<T: Scalar> Lifted<T> {
    fn new(ss: &StateSpaceModel<T>, h_fast: T, m: usize) -> Result<Self> {
        let n = ss.states();
        let (phi, gamma) = zoh_matrices(&ss.a, &ss.b, h_fast)?;
        let mut cols = DMatrix::zeros(n, m);
        let mut g = gamma.column(0).into_owned();
        for j in (0..m).rev() {
            cols.set_column(j, &g);
            g = &phi * g;
        }
        let mut phi_m = DMatrix::identity(n, n);
        for _ in 0..m {
            phi_m = &phi * phi_m;
        }
        Ok(Lifted {
            n,
            m,
            phi_m: row_major(&phi_m),
            kmat: row_major(&cols),
        })
    }

    fn run(&self, x_fast: &[T], slow: usize, mut visit: impl FnMut(usize, &[T])) {
        let (n, m) = (self.n, self.m);
        let mut z = vec![T::zero(); n];
        let mut next = vec![T::zero(); n];
        for k in 0..slow {
            visit(k, &z);
            if k + 1 == slow {
                break;
            }
            let seg = &x_fast[k * m..(k + 1) * m];
            for i in 0..n {
                let prow = &self.phi_m[i * n..(i + 1) * n];
                let krow = &self.kmat[i * m..(i + 1) * m];
                let mut acc = T::zero();
                for j in 0..n {
                    acc += prow[j] * z[j];
                }
                for j in 0..m {
                    acc += krow[j] * seg[j];
                }
                next[i] = acc;
            }
            std::mem::swap(&mut z, &mut next);
        }
    }
}

/// `{G(p) x(t)}_{t = t_k}` for an input known on a grid `m` times finer
/// than the output: ZOH filtering at the fast rate, read at every `m`-th
/// fast instant (no anti-alias filtering, zero phase offset).
pub fn filter_fast_then_sample<T: Scalar>(
    g: &CtTransferFunction<T>,
    x_fast: &SampledSignal<T>,
    m: usize,
    hold: HoldType,
) -> Result<SampledSignal<T>> {
    require_zoh(hold, "fast-rate filtering")?;
    let slow = slow_len(x_fast.len(), m)?;
    let h = x_fast.h() * lit::<T>(m as f64);
    if m == 1 {
        return filter_sampled(g, x_fast, hold);
    }
    let ss = StateSpaceModel::from_ct(g);
    let d = ss.d_scalar();
    let xv = x_fast.values();
    let mut out = vec![T::zero(); slow];
    if ss.states() == 0 {
        for k in 0..slow {
            out[k] = d * xv[k * m];
        }
    } else {
        let c: Vec<T> = ss.c.row(0).iter().copied().collect();
        let lifted = Lifted::new(&ss, x_fast.h(), m)?;
        lifted.run(xv, slow, |k, z| {
            let mut acc = d * xv[k * m];
            for j in 0..c.len() {
                acc += c[j] * z[j];
            }
            out[k] = acc;
        });
    }
    SampledSignal::with_start(out, h, x_fast.t0())
}

/// Derivative bank of `1/A` driven by a fast-rate input and sampled on the
/// slow grid. Identical to [`derivative_bank`] when `m == 1`.
pub fn derivative_bank_fast<T: Scalar>(
    a: &CtPolynomial<T>,
    x_fast: &SampledSignal<T>,
    m: usize,
    hold: HoldType,
    max_order: usize,
) -> Result<DerivativeBankOutput<T>> {
    require_zoh(hold, "the fast derivative bank")?;
    let slow = slow_len(x_fast.len(), m)?;
    if m == 1 {
        return derivative_bank(a, x_fast, hold, max_order);
    }
    let real = BankRealization::new(a, max_order)?;
    let rows_n = max_order + 1;
    let xv = x_fast.values();
    let mut rows = DMatrix::zeros(rows_n, slow);
    let buf = rows.as_mut_slice();
    if real.ss.states() == 0 {
        for k in 0..slow {
            real.emit(&[], xv[k * m], &mut buf[k * rows_n..(k + 1) * rows_n]);
        }
    } else {
        let lifted = Lifted::new(&real.ss, x_fast.h(), m)?;
        lifted.run(xv, slow, |k, z| {
            real.emit(z, xv[k * m], &mut buf[k * rows_n..(k + 1) * rows_n])
        });
    }
    Ok(DerivativeBankOutput::from_matrix(rows))
}
