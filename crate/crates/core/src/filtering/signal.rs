use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Relative tolerance on the spacing of time stamps when loading a signal.
pub const GRID_JITTER_TOL: f64 = 1e-9;

/// Uniformly sampled scalar signal; sample `k` sits at `t0 + k h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SampledSignal<T: Scalar> {
    values: Vec<T>,
    h: T,
    #[serde(default)]
    t0: T,
}

impl<T: Scalar> SampledSignal<T> {
    pub fn new(values: Vec<T>, h: T) -> Result<Self> {
        Self::with_start(values, h, T::zero())
    }

    pub fn with_start(values: Vec<T>, h: T, t0: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::invalid("sample period must be positive"));
        }
        Ok(SampledSignal { values, h, t0 })
    }

    pub fn zeros(len: usize, h: T) -> Result<Self> {
        Self::new(vec![T::zero(); len], h)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + self.h * lit::<T>(k as f64)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<T>) -> Self {
        SampledSignal {
            values,
            h: self.h,
            t0: self.t0,
        }
    }

    /// Every `m`-th sample starting at index 0; the period grows by `m`.
    pub fn decimate(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("decimation factor must be at least 1"));
        }
        let values = self.values.iter().step_by(m).copied().collect();
        Self::with_start(values, self.h * lit::<T>(m as f64), self.t0)
    }

    /// Signal restricted to indices `start..`.
    pub fn skip(&self, start: usize) -> Self {
        let start = start.min(self.len());
        SampledSignal {
            values: self.values[start..].to_vec(),
            h: self.h,
            t0: self.time(start),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        self.with_values(self.values.iter().map(|&x| f(x)).collect())
    }
}

impl SampledSignal<f64> {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        w.write_record(["t", "value"]).map_err(|e| csv_err(path, e))?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([self.time(k).to_string(), v.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a `t,value` file and checks that the time stamps are uniformly
    /// spaced.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::parse(path, "expected header `t,value`"));
        }
        let mut t = Vec::new();
        let mut v = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(path, format!("bad number {s:?}: {e}")))
            };
            t.push(parse(&rec[0])?);
            v.push(parse(&rec[1])?);
        }
        let (t0, h) = uniform_grid(&t).map_err(|m| Error::parse(path, m))?;
        Self::with_start(v, h, t0)
    }
}

/// Recovers `(t0, h)` from time stamps, rejecting non-uniform grids.
pub(crate) fn uniform_grid(t: &[f64]) -> std::result::Result<(f64, f64), String> {
    if t.len() < 2 {
        return Err("at least two samples are needed to infer the sample period".into());
    }
    let t0 = t[0];
    let h = (t[t.len() - 1] - t0) / (t.len() - 1) as f64;
    if !(h > 0.0) {
        return Err("time stamps must be increasing".into());
    }
    for (k, &tk) in t.iter().enumerate() {
        let expect = t0 + k as f64 * h;
        let step_err = (tk - expect).abs() / h;
        if step_err > GRID_JITTER_TOL * (k.max(1) as f64) {
            return Err(format!(
                "non-uniform sampling at row {k}: t = {tk}, expected {expect}"
            ));
        }
    }
    Ok((t0, h))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::parse(path, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = SampledSignal::new(vec![0.1, -2.5e-17, 3.0, std::f64::consts::PI], 0.1).unwrap();
        s.write_csv(&p).unwrap();
        let back = SampledSignal::read_csv(&p).unwrap();
        assert_eq!(back.values(), s.values());
        assert!((back.h() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_jittered_grid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "t,value\n0,1\n0.1,2\n0.2000001,3\n0.3,4\n").unwrap();
        assert!(SampledSignal::read_csv(&p).is_err());
    }

    #[test]
    fn decimate_keeps_phase() {
        let s = SampledSignal::new((0..11).map(|k| k as f64).collect(), 0.01).unwrap();
        let d = s.decimate(5).unwrap();
        assert_eq!(d.values(), &[0.0, 5.0, 10.0]);
        assert!((d.h() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_period_rejected() {
        assert!(SampledSignal::new(vec![1.0], 0.0).is_err());
    }
}
