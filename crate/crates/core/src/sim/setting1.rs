use nalgebra::{DMatrix, DVector};

use super::record::{RecordMeta, SampledRecord};
use super::rng::{GaussianStream, STREAM_NOISE, STREAM_REFERENCE};
use super::scenario::{ScenarioConfig, Setting};
use crate::error::{Error, Result};
use crate::lti::{zoh_matrices, StateSpaceModel};
use crate::{CtTf, Signal};

/// Continuous closed loop driven by `w = [r; v]`, with state `x = [x_p; x_c]`.
///
/// `u = cu x + du w`, `y = cy x + dy w`.
pub(crate) struct ContinuousLoop {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub cu: DMatrix<f64>,
    pub du: DMatrix<f64>,
    pub cy: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

impl ContinuousLoop {
    pub fn new(plant: &CtTf, ctrl: &CtTf) -> Result<Self> {
        let p = StateSpaceModel::from_ct(plant);
        let c = StateSpaceModel::from_ct(ctrl);
        let (np, nc) = (p.states(), c.states());
        let (dp, dc) = (p.d_scalar(), c.d_scalar());
        let den = 1.0 + dc * dp;
        if den.abs() < 1e-12 {
            return Err(Error::AlgebraicLoop(
                "1 + D_c D_p vanishes, the feedthrough loop has no unique solution".into(),
            ));
        }
        let s = 1.0 / den;
        let n = np + nc;

        // u = s (C_c x_c + D_c r - D_c C_p x_p - D_c v)
        let mut cu = DMatrix::zeros(1, n);
        cu.view_mut((0, 0), (1, np)).copy_from(&(&p.c * (-dc * s)));
        cu.view_mut((0, np), (1, nc)).copy_from(&(&c.c * s));
        let du = DMatrix::from_row_slice(1, 2, &[s * dc, -s * dc]);

        // e = r - C_p x_p - D_p u - v
        let mut ce = DMatrix::zeros(1, n);
        ce.view_mut((0, 0), (1, np)).copy_from(&(-&p.c));
        let ce = ce - &cu * dp;
        let de = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]) - &du * dp;

        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (np, np)).copy_from(&p.a);
        a.view_mut((np, np), (nc, nc)).copy_from(&c.a);
        let mut bu = DMatrix::zeros(n, 1);
        bu.view_mut((0, 0), (np, 1)).copy_from(&p.b);
        let mut be = DMatrix::zeros(n, 1);
        be.view_mut((np, 0), (nc, 1)).copy_from(&c.b);
        let a = a + &bu * &cu + &be * &ce;
        let b = &bu * &du + &be * &de;

        let mut cy = DMatrix::zeros(1, n);
        cy.view_mut((0, 0), (1, np)).copy_from(&p.c);
        let cy = cy + &cu * dp;
        let dy = &du * dp + DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        Ok(ContinuousLoop { a, b, cu, du, cy, dy })
    }
}

fn draws(cfg: &ScenarioConfig) -> (Vec<f64>, Vec<f64>) {
    let n = cfg.n_samples;
    let r = GaussianStream::new(cfg.seed, STREAM_REFERENCE).take(n, cfg.sigma_r2.sqrt());
    let e = GaussianStream::new(cfg.seed, STREAM_NOISE).take(n, cfg.sigma_v2.sqrt());
    let v = match &cfg.noise_filter {
        Some(hf) => hf.filter(&e),
        None => e,
    };
    (r, v)
}

/// Setting-1 record: `r` and `v` are held between output samples, the loop
/// (including the controller's continuous dynamics) evolves exactly and
/// `u(t)`, `y(t)` are read at the sampling instants.
///
/// The closed-loop state equation is discretized exactly for piecewise
/// constant `[r; v]`, which is the limit of any dense-grid integration.
pub fn simulate_setting1(cfg: &ScenarioConfig) -> Result<SampledRecord> {
    simulate_setting1_substeps(cfg, 1)
}

/// As [`simulate_setting1`], but propagating the state through `substeps`
/// equal sub-intervals per sample period. Results agree with the single-step
/// propagation up to rounding; used to check grid convergence.
pub fn simulate_setting1_substeps(cfg: &ScenarioConfig, substeps: usize) -> Result<SampledRecord> {
    if cfg.setting != Setting::Continuous {
        return Err(Error::Config("simulate_setting1 needs a setting-1 scenario".into()));
    }
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    cfg.validate()?;
    let ctrl = cfg.continuous_controller().expect("validated");
    let lp = ContinuousLoop::new(&cfg.plant, ctrl)?;
    let (r, v) = draws(cfg);
    let n = cfg.n_samples;
    let h = cfg.h;
    let dim = lp.a.nrows();

    let (phi_s, gam_s) = zoh_matrices(&lp.a, &lp.b, h / substeps as f64)?;
    // Fast logging grid of factor M reuses the sub-step machinery.
    let fast_m = cfg.oversample_m.filter(|&m| m > 1);
    let fast_mats = match fast_m {
        Some(m) => Some(zoh_matrices(&lp.a, &lp.b, h / m as f64)?),
        None => None,
    };

    let mut u = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut u_fast = fast_m.map(|m| Vec::with_capacity((n - 1) * m + 1));
    let mut x = DVector::<f64>::zeros(dim);
    let mut w = DVector::<f64>::zeros(2);
    let mut tmp = DVector::<f64>::zeros(dim);
    for k in 0..n {
        w[0] = r[k];
        w[1] = v[k];
        u.push((&lp.cu * &x)[0] + (&lp.du * &w)[0]);
        y.push((&lp.cy * &x)[0] + (&lp.dy * &w)[0]);
        if let (Some(buf), Some((pf, gf)), Some(m)) = (u_fast.as_mut(), fast_mats.as_ref(), fast_m) {
            if k + 1 == n {
                buf.push(u[k]);
            } else {
                let mut xf = x.clone();
                let gw = gf * &w;
                for _ in 0..m {
                    buf.push((&lp.cu * &xf)[0] + (&lp.du * &w)[0]);
                    tmp.gemv(1.0, pf, &xf, 0.0);
                    tmp += &gw;
                    std::mem::swap(&mut xf, &mut tmp);
                }
            }
        }
        if k + 1 < n {
            let gw = &gam_s * &w;
            for _ in 0..substeps {
                tmp.gemv(1.0, &phi_s, &x, 0.0);
                tmp += &gw;
                std::mem::swap(&mut x, &mut tmp);
            }
        }
    }
    assemble(cfg, r, u, y, v, u_fast, fast_m)
}

pub(crate) fn assemble(
    cfg: &ScenarioConfig,
    r: Vec<f64>,
    u: Vec<f64>,
    y: Vec<f64>,
    v: Vec<f64>,
    u_fast: Option<Vec<f64>>,
    fast_m: Option<usize>,
) -> Result<SampledRecord> {
    let h = cfg.h;
    let meta = RecordMeta {
        scenario: Some(cfg.clone()),
        true_theta: cfg.true_theta().ok(),
        fast_factor: fast_m,
    };
    let rec = SampledRecord {
        r: Signal::new(r, h)?,
        u: Signal::new(u, h)?,
        y: Signal::new(y, h)?,
        u_fast: match (u_fast, fast_m) {
            (Some(f), Some(m)) => Some(Signal::new(f, h / m as f64)?),
            _ => None,
        },
        v: Some(v),
        meta,
    };
    rec.check()?;
    Ok(rec)
}
