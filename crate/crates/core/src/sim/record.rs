use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::ScenarioConfig;
use crate::error::{Error, Result};
use crate::filtering::{check_alignment, uniform_grid, SampledSignal};
use crate::theta::ThetaVector;
use crate::Signal;

/// Provenance stored next to the signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RecordMeta {
    /// Present for synthetic records only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_theta: Option<ThetaVector>,
    /// Oversampling factor of `u_fast`, when logged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_factor: Option<usize>,
}

/// Slow-rate closed-loop data `{r, u, y}` plus an optional fast input track.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRecord {
    pub r: Signal,
    pub u: Signal,
    pub y: Signal,
    pub u_fast: Option<Signal>,
    /// Output disturbance samples; kept in memory for synthetic records and
    /// never written to disk.
    pub v: Option<Vec<f64>>,
    pub meta: RecordMeta,
}

const CONFIG_FILE: &str = "config.json";
const SIGNALS_FILE: &str = "signals.csv";
const FAST_FILE: &str = "u_fast.csv";

impl SampledRecord {
    pub fn new(r: Signal, u: Signal, y: Signal) -> Result<Self> {
        let rec = SampledRecord {
            r,
            u,
            y,
            u_fast: None,
            v: None,
            meta: RecordMeta::default(),
        };
        rec.check()?;
        Ok(rec)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.y.h()
    }

    pub fn fast_factor(&self) -> Option<usize> {
        self.meta.fast_factor
    }

    /// Structural invariants: equal slow lengths and periods, aligned fast grid.
    pub fn check(&self) -> Result<()> {
        let n = self.y.len();
        if self.u.len() != n || self.r.len() != n {
            return Err(Error::invalid(format!(
                "record tracks differ in length: r {}, u {}, y {}",
                self.r.len(),
                self.u.len(),
                n
            )));
        }
        for s in [&self.r, &self.u] {
            if (s.h() - self.y.h()).abs() > 1e-12 * self.y.h() {
                return Err(Error::Misaligned("slow tracks use different sample periods".into()));
            }
        }
        if let Some(f) = &self.u_fast {
            let m = self
                .meta
                .fast_factor
                .ok_or_else(|| Error::invalid("fast input without an oversampling factor"))?;
            check_alignment(f.len(), n, m)?;
        }
        if let Some(v) = &self.v {
            if v.len() != n {
                return Err(Error::invalid("noise track length differs from the record"));
            }
        }
        Ok(())
    }

    /// Copy restricted to samples `start..`, for transient-discard studies.
    pub fn skip(&self, start: usize) -> Self {
        let m = self.meta.fast_factor.unwrap_or(1);
        SampledRecord {
            r: self.r.skip(start),
            u: self.u.skip(start),
            y: self.y.skip(start),
            u_fast: self.u_fast.as_ref().map(|f| f.skip(start * m)),
            v: self.v.as_ref().map(|v| v[start.min(v.len())..].to_vec()),
            meta: self.meta.clone(),
        }
    }

    /// Writes `config.json`, `signals.csv` (`t,r,u,y`) and, when present,
    /// `u_fast.csv`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cfg = dir.join(CONFIG_FILE);
        let json = serde_json::to_string_pretty(&self.meta).map_err(|e| Error::parse(&cfg, e))?;
        fs::write(&cfg, json).map_err(|e| Error::io(&cfg, e))?;

        let sig = dir.join(SIGNALS_FILE);
        let mut w = csv::Writer::from_path(&sig).map_err(|e| Error::parse(&sig, e))?;
        w.write_record(["t", "r", "u", "y"]).map_err(|e| Error::parse(&sig, e))?;
        for k in 0..self.len() {
            w.write_record([
                self.y.time(k).to_string(),
                self.r.values()[k].to_string(),
                self.u.values()[k].to_string(),
                self.y.values()[k].to_string(),
            ])
            .map_err(|e| Error::parse(&sig, e))?;
        }
        w.flush().map_err(|e| Error::io(&sig, e))?;

        if let Some(f) = &self.u_fast {
            f.write_csv(&dir.join(FAST_FILE))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::MissingData(format!("record directory {} not found", dir.display())));
        }
        let cfg = dir.join(CONFIG_FILE);
        let meta: RecordMeta = if cfg.exists() {
            let text = fs::read_to_string(&cfg).map_err(|e| Error::io(&cfg, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(&cfg, e))?
        } else {
            RecordMeta::default()
        };

        let sig = dir.join(SIGNALS_FILE);
        let mut rd = csv::Reader::from_path(&sig).map_err(|e| Error::parse(&sig, e))?;
        let headers = rd.headers().map_err(|e| Error::parse(&sig, e))?.clone();
        let want = ["t", "r", "u", "y"];
        if headers.len() != 4 || headers.iter().zip(want).any(|(a, b)| a != b) {
            return Err(Error::parse(&sig, "expected header `t,r,u,y`"));
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::parse(&sig, e))?;
            for (c, field) in cols.iter_mut().zip(rec.iter()) {
                c.push(
                    field
                        .trim()
                        .parse()
                        .map_err(|e| Error::parse(&sig, format!("bad number {field:?}: {e}")))?,
                );
            }
        }
        let [t, r, u, y] = cols;
        let (t0, h) = uniform_grid(&t).map_err(|m| Error::parse(&sig, m))?;
        let mk = |v: Vec<f64>| SampledSignal::with_start(v, h, t0);
        let fast = dir.join(FAST_FILE);
        let u_fast = if fast.exists() {
            Some(SampledSignal::read_csv(&fast)?)
        } else {
            None
        };
        let rec = SampledRecord {
            r: mk(r)?,
            u: mk(u)?,
            y: mk(y)?,
            u_fast,
            v: None,
            meta,
        };
        rec.check()?;
        Ok(rec)
    }
}
