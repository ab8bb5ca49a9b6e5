use proptest::prelude::*;
use srivc::estim::{build_instrument, build_regressor, iv_step, EstimatorConfig, InstrumentSpec, Method};
use srivc::filtering::{filter_sampled, HoldType};
use srivc::presets::paper_setting2;
use srivc::sim::{simulate, SampledRecord};
use srivc::ThetaVector;

fn noise_free_record(n: usize) -> SampledRecord {
    simulate(&paper_setting2().with_samples(n).noise_free()).unwrap()
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// Row `i` of the open-loop instrument is the sensitivity of the model
    /// output `B/A u` to entry `i` of theta, and row `i` of the regressor is
    /// its noise-free counterpart built from measured data.
    #[test]
    fn columns_follow_theta_order(da1 in -0.1f64..0.1, da2 in -0.1f64..0.1, db0 in -0.1f64..0.1, db1 in -0.1f64..0.1) {
        let rec = noise_free_record(1500);
        let th = ThetaVector::new(vec![0.707 + da1, 0.5 + da2], vec![0.5 + db0, -0.25 + db1]).unwrap();
        let cfg = EstimatorConfig::new(Method::Srivc, 2, 1);
        let ins = build_instrument(&rec, &th, &cfg, &InstrumentSpec::open_loop()).unwrap();
        let truth = ThetaVector::new(vec![0.707, 0.5], vec![0.5, -0.25]).unwrap();
        let reg = build_regressor(&rec, &truth, &cfg).unwrap();
        let base = th.to_vec();
        let eps = 1e-6;
        for i in 0..4 {
            let out = |s: f64| {
                let mut v = base.clone();
                v[i] += s * eps;
                let g = ThetaVector::from_slice(&v, 2, 1).unwrap().tf().unwrap();
                filter_sampled(&g, &rec.u, HoldType::Zoh).unwrap().into_values()
            };
            let (up, dn) = (out(1.0), out(-1.0));
            let fd: Vec<f64> = up.iter().zip(&dn).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
            let row: Vec<f64> = ins.phi_hat.row(i).iter().copied().collect();
            let scale = fd.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let err = fd.iter().zip(&row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-6 * scale.max(1.0), "row {}: {}", i, err);
            // Other entries do not explain this row.
            for j in (0..4).filter(|&j| j != i) {
                let other: Vec<f64> = ins.phi_hat.row(j).iter().copied().collect();
                prop_assert!(corr(&fd, &other).abs() < 0.999);
            }
        }
        // At the truth the regressor is the sensitivity up to interpolation
        // of the output.
        let ins_t = build_instrument(&rec, &truth, &cfg, &InstrumentSpec::open_loop()).unwrap();
        for i in 0..4 {
            let a: Vec<f64> = ins_t.phi_hat.row(i).iter().copied().collect();
            let b: Vec<f64> = reg.phi.row(i).iter().copied().collect();
            prop_assert!(corr(&a, &b) > 0.99, "row {}", i);
        }
    }
}

#[test]
fn condition_number_is_stable_under_subsampling() {
    let sc = paper_setting2().with_samples(40_000);
    let cfg = EstimatorConfig::new(Method::Clsrivc, 2, 1);
    let spec = InstrumentSpec::for_method(Method::Clsrivc, &sc);
    let th = ThetaVector::new(vec![0.7, 0.49], vec![0.51, -0.24]).unwrap();
    let full = simulate(&sc).unwrap();
    let cond = |rec: &SampledRecord| {
        let ins = build_instrument(rec, &th, &cfg, &spec).unwrap();
        let reg = build_regressor(rec, &th, &cfg).unwrap();
        iv_step(&ins.phi_hat, &reg.phi, &reg.y_f, 2, 1).unwrap().condition
    };
    let c_full = cond(&full);
    for seed in [2, 3] {
        let half = simulate(&sc.with_samples(20_000).with_seed(seed)).unwrap();
        let c_half = cond(&half);
        assert!(c_half < 2.0 * c_full && c_full < 2.0 * c_half, "{c_full} {c_half}");
    }
}
