use nalgebra::DVector;

use super::rng::{GaussianStream, STREAM_NOISE, STREAM_REFERENCE};
use super::record::SampledRecord;
use super::scenario::{ScenarioConfig, Setting};
use super::setting1::assemble;
use crate::error::{Error, Result};
use crate::lti::StateSpaceModel;

/// Setting-2 record: discrete controller, ZOH actuation, plant replaced by
/// its exact ZOH equivalent. The input is piecewise constant, so `u_fast`
/// simply repeats every sample `M` times.
pub fn simulate_setting2(cfg: &ScenarioConfig) -> Result<SampledRecord> {
    if cfg.setting != Setting::Hybrid {
        return Err(Error::Config("simulate_setting2 needs a setting-2 scenario".into()));
    }
    cfg.validate()?;
    let gd = cfg.plant_zoh()?;
    let cd = cfg.discrete_controller().expect("validated");
    let p = StateSpaceModel::from_dt(&gd);
    let c = StateSpaceModel::from_dt(cd);
    let (dp, dc) = (p.d_scalar(), c.d_scalar());
    let den = 1.0 + dc * dp;
    if den.abs() < 1e-12 {
        return Err(Error::AlgebraicLoop(
            "1 + C_d(inf) G_d(inf) vanishes, u cannot be solved from the loop equations".into(),
        ));
    }

    let n = cfg.n_samples;
    let r = GaussianStream::new(cfg.seed, STREAM_REFERENCE).take(n, cfg.sigma_r2.sqrt());
    let e = GaussianStream::new(cfg.seed, STREAM_NOISE).take(n, cfg.sigma_v2.sqrt());
    let v = match &cfg.noise_filter {
        Some(hf) => hf.filter(&e),
        None => e,
    };

    let mut xp = DVector::<f64>::zeros(p.states());
    let mut xc = DVector::<f64>::zeros(c.states());
    let mut u = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for k in 0..n {
        let yp_free = (&p.c * &xp)[0];
        let uc_free = (&c.c * &xc)[0];
        // u = C_c x_c + D_c (r - y_p - v), y_p = C_p x_p + D_p u
        let uk = (uc_free + dc * (r[k] - yp_free - v[k])) / den;
        let ypk = yp_free + dp * uk;
        let ek = r[k] - ypk - v[k];
        u.push(uk);
        y.push(ypk + v[k]);
        xp = &p.a * &xp + &p.b * uk;
        xc = &c.a * &xc + &c.b * ek;
    }

    let fast_m = cfg.oversample_m.filter(|&m| m > 1);
    let u_fast = fast_m.map(|m| {
        let mut f = Vec::with_capacity((n - 1) * m + 1);
        for &uk in &u[..n - 1] {
            f.extend(std::iter::repeat(uk).take(m));
        }
        f.push(u[n - 1]);
        f
    });
    assemble(cfg, r, u, y, v, u_fast, fast_m)
}
