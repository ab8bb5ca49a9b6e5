//! Property suites for the algebraic and filtering layers, each against an
//! oracle that does not go through the code under test. Shared by the
//! `properties` and `acceptance` targets.

use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use srivc::filtering::{derivative_bank, filter_sampled, HoldType};
use srivc::lti::{build_sylvester, c2d_zoh, impulse_response_l1, matrix_exponential, stability_check_ct, stability_check_dt};
use srivc::presets::{paper_setting1, paper_setting2};
use srivc::sim::simulate;
use srivc::{CtPoly, CtTf, DtTf, Signal};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Stable continuous poles: one real pair or a complex-conjugate pair, plus
/// an optional real pole, separated enough to keep the mapping well posed.
fn stable_poles() -> impl Strategy<Value = Vec<Complex<f64>>> {
    (0.2f64..3.0, 0.0f64..4.0, prop::bool::ANY, prop::option::of(0.1f64..5.0)).prop_map(|(re, im, complex, extra)| {
        let mut p = if complex && im > 0.2 {
            vec![Complex::new(-re, im), Complex::new(-re, -im)]
        } else {
            vec![Complex::new(-re, 0.0), Complex::new(-re - 0.5 - im, 0.0)]
        };
        if let Some(e) = extra {
            if p.iter().all(|q| (q.re + e).abs() > 0.05) {
                p.push(Complex::new(-e, 0.0));
            }
        }
        p
    })
}

fn random_signal(len: usize, seed: u64, h: f64) -> Signal {
    let mut s = srivc::sim::GaussianStream::new(seed, 9);
    Signal::new(s.take(len, 1.0), h).unwrap()
}

fn greedy_match(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(cfg(64))]

    fn zoh_maps_poles_through_the_exponential(poles in stable_poles(), h in 0.01f64..0.5, k in 0.2f64..3.0) {
        let den = CtPoly::from_roots(&poles, 1.0);
        let g = CtTf::new(CtPoly::constant(k), den).unwrap();
        let gd = c2d_zoh(&g, h).unwrap();
        let mapped: Vec<Complex<f64>> = poles.iter().map(|p| (p * h).exp()).collect();
        prop_assert!(greedy_match(&mapped, &gd.poles()) < 1e-10);
        prop_assert_eq!(gd.order(), poles.len());
    }

    fn zoh_preserves_dc_gain(poles in stable_poles(), h in 0.01f64..0.5, b in -2.0f64..2.0) {
        let den = CtPoly::from_roots(&poles, 1.0);
        let num = CtPoly::from_f64(&[1.0, b]);
        let g = CtTf::new(num, den).unwrap();
        let gd = c2d_zoh(&g, h).unwrap();
        prop_assert!((gd.dc_gain() - g.dc_gain()).abs() < 1e-10 * (1.0 + g.dc_gain().abs()));
    }

    fn zoh_second_order_closed_form(a in 0.1f64..3.0, gap in 0.2f64..3.0, h in 0.01f64..0.5) {
        // 1/((p+a)(p+b)) through (1 - z^-1) Z{G(s)/s} by partial fractions.
        let b = a + gap;
        let g = CtTf::new(CtPoly::one(), CtPoly::from_f64(&[a * b, a + b, 1.0])).unwrap();
        let gd = c2d_zoh(&g, h).unwrap();
        let (ea, eb) = ((-a * h).exp(), (-b * h).exp());
        for w in [0.0, 0.3, 1.1, 2.5, 3.1] {
            let z = Complex::from_polar(1.0, w);
            let one = Complex::new(1.0, 0.0);
            let expected = one / (a * b)
                + (z - 1.0) / ((z - ea) * (a * (a - b)))
                + (z - 1.0) / ((z - eb) * (b * (b - a)));
            prop_assert!((gd.eval(z) - expected).norm() < 1e-10);
        }
    }

    fn zoh_first_order_closed_form(k in -3.0f64..3.0, tau in 0.05f64..5.0, h in 0.01f64..1.0) {
        let g = CtTf::from_f64(&[k], &[1.0, tau]).unwrap();
        let gd = c2d_zoh(&g, h).unwrap();
        let e = (-h / tau).exp();
        let expected = DtTf::from_f64(&[k * (1.0 - e)], &[1.0, -e], h).unwrap();
        prop_assert!((gd.num()[0] - expected.num()[0]).abs() < 1e-10);
        prop_assert!((gd.den()[1] - expected.den()[1]).abs() < 1e-10);
    }

    fn exponential_of_commuting_sum(seed in 0u64..10_000, alpha in -1.0f64..1.0, beta in -0.5f64..0.5) {
        let mut s = srivc::sim::GaussianStream::new(seed, 3);
        let m = DMatrix::from_iterator(3, 3, s.take(9, 0.7));
        // Any polynomial in M commutes with M.
        let n = &m * alpha + &m * &m * beta + DMatrix::identity(3, 3) * 0.3;
        let lhs = matrix_exponential(&(&m + &n)).unwrap();
        let rhs = matrix_exponential(&m).unwrap() * matrix_exponential(&n).unwrap();
        prop_assert!((&lhs - &rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    fn exponential_matches_taylor_series(seed in 0u64..10_000) {
        let mut s = srivc::sim::GaussianStream::new(seed, 4);
        let m = DMatrix::from_iterator(4, 4, s.take(16, 0.3));
        let mut term = DMatrix::<f64>::identity(4, 4);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &m / k as f64;
            sum += &term;
        }
        prop_assert!((matrix_exponential(&m).unwrap() - sum).norm() < 1e-12);
    }

    fn stability_agrees_with_quadratic_formula(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        prop_assume!(c2.abs() > 1e-3 && c0.abs() > 1e-3);
        let disc = c1 * c1 - 4.0 * c2 * c0;
        prop_assume!(disc.abs() > 1e-6);
        let roots = if disc >= 0.0 {
            let s = disc.sqrt();
            vec![(-c1 + s) / (2.0 * c2), (-c1 - s) / (2.0 * c2)]
        } else {
            vec![-c1 / (2.0 * c2)]
        };
        let max_re = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(max_re.abs() > 1e-6);
        let rep = stability_check_ct(&CtPoly::from_f64(&[c0, c1, c2]));
        prop_assert_eq!(rep.stable, max_re < 0.0);
        // Degree one, continuous and discrete.
        let lin = stability_check_ct(&CtPoly::from_f64(&[c0, c2]));
        prop_assert_eq!(lin.stable, -c0 / c2 < 0.0);
        let root = c1 / 3.1;
        prop_assume!((root.abs() - 1.0).abs() > 1e-6);
        let dt = DtTf::from_f64(&[1.0], &[1.0, -root], 0.1).unwrap();
        prop_assert_eq!(stability_check_dt(&dt).stable, root.abs() < 1.0);
    }

    fn discrete_quadratic_stability(r in 0.0f64..1.6, w in 0.0f64..3.1) {
        prop_assume!((r - 1.0).abs() > 1e-6);
        // (q - r e^{iw})(q - r e^{-iw}) = q^2 - 2 r cos w q + r^2
        let dt = DtTf::from_f64(&[1.0], &[1.0, -2.0 * r * w.cos(), r * r], 0.1).unwrap();
        prop_assert_eq!(stability_check_dt(&dt).stable, r < 1.0);
    }

    fn filtering_is_linear(poles in stable_poles(), seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let g = CtTf::new(CtPoly::from_f64(&[1.0, 0.3]), CtPoly::from_roots(&poles, 1.0)).unwrap();
        let x = random_signal(300, seed, 0.1);
        let y = random_signal(300, seed + 7_000, 0.1);
        let combo = x.with_values(x.values().iter().zip(y.values()).map(|(a, b)| alpha * a + beta * b).collect());
        let fx = filter_sampled(&g, &x, HoldType::Zoh).unwrap();
        let fy = filter_sampled(&g, &y, HoldType::Zoh).unwrap();
        let fc = filter_sampled(&g, &combo, HoldType::Zoh).unwrap();
        for k in 0..300 {
            let lin = alpha * fx.values()[k] + beta * fy.values()[k];
            prop_assert!((fc.values()[k] - lin).abs() < 1e-12 * (1.0 + lin.abs()));
        }
    }

    fn derivative_bank_is_self_consistent(poles in stable_poles(), seed in 0u64..1000, h in 0.02f64..0.3) {
        let a = CtPoly::from_roots(&poles, 1.0).normalized();
        let x = random_signal(400, seed, h);
        let bank = derivative_bank(&a, &x, HoldType::Zoh, a.degree()).unwrap();
        let back = bank.apply_polynomial(&a);
        let worst = back.iter().zip(x.values()).map(|(b, x)| (b - x).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-9, "{}", worst);
    }

    fn cascading_sampled_filters_does_not_commute(a in 0.2f64..3.0, b in 0.2f64..3.0, k in -3.0f64..3.0, seed in 0u64..1000) {
        prop_assume!(k.abs() > 0.1);
        let g1 = CtTf::from_f64(&[1.0], &[a, 1.0]).unwrap();
        let g2 = CtTf::from_f64(&[1.0], &[b, 1.0]).unwrap();
        let r = random_signal(200, seed, 0.1);
        let cascade = filter_sampled(&g1, &filter_sampled(&g2, &r, HoldType::Zoh).unwrap(), HoldType::Zoh).unwrap();
        let joint = filter_sampled(&g1.series(&g2).unwrap(), &r, HoldType::Zoh).unwrap();
        let gap = cascade.values().iter().zip(joint.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(gap > 1e-4, "{}", gap);
        // With a pure gain as one factor the two coincide.
        let gain = CtTf::gain(k);
        let c2 = filter_sampled(&g1, &filter_sampled(&gain, &r, HoldType::Zoh).unwrap(), HoldType::Zoh).unwrap();
        let j2 = filter_sampled(&g1.series(&gain).unwrap(), &r, HoldType::Zoh).unwrap();
        for (x, y) in c2.values().iter().zip(j2.values()) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let dx = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * dx / 3.0
}

proptest! {
    #![proptest_config(cfg(24))]

    fn hold_exact_input_matches_convolution_quadrature(a in 0.3f64..3.0, gap in 0.3f64..2.0, seed in 0u64..1000, h in 0.05f64..0.4) {
        // Impulse response of 1/((p+a)(p+b)) in closed form.
        let b = a + gap;
        let imp = |t: f64| ((-a * t).exp() - (-b * t).exp()) / (b - a);
        let g = CtTf::new(CtPoly::one(), CtPoly::from_f64(&[a * b, a + b, 1.0])).unwrap();
        let x = random_signal(25, seed, h);
        let y = filter_sampled(&g, &x, HoldType::Zoh).unwrap();
        for k in 0..x.len() {
            let tk = k as f64 * h;
            let mut exact = 0.0;
            for j in 0..k {
                let (t0, t1) = (j as f64 * h, (j + 1) as f64 * h);
                exact += x.values()[j] * simpson(|tau| imp(tk - tau), t0, t1, 200);
            }
            prop_assert!((y.values()[k] - exact).abs() < 1e-8, "k={} {} {}", k, y.values()[k], exact);
        }
    }

    fn impulse_l1_matches_simpson(zeta in 0.05f64..0.9, wn in 0.3f64..4.0) {
        let g = CtTf::from_f64(&[wn * wn], &[wn * wn, 2.0 * zeta * wn, 1.0]).unwrap();
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        let imp = |t: f64| (wn / (1.0 - zeta * zeta).sqrt() * (-zeta * wn * t).exp() * (wd * t).sin()).abs();
        let horizon = 40.0 / (zeta * wn);
        let oracle = simpson(imp, 0.0, horizon, 400_000);
        let l1 = impulse_response_l1(&g, horizon, 1e-3 / wn).unwrap();
        prop_assert!((l1 - oracle).abs() < 1e-4 * oracle, "{} {}", l1, oracle);
    }
}

/// Roots-based resultant `Res(F, G) = (-1)^{deg F deg G} lead(G)^{deg F} prod F(beta)`
/// over the roots `beta` of `G`.
fn resultant_by_roots(f: &CtPoly, g: &CtPoly) -> f64 {
    let sign = if (f.degree() * g.degree()) % 2 == 0 { 1.0 } else { -1.0 };
    let prod = g
        .roots()
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, r| acc * f.eval_complex(*r));
    sign * g.leading().powi(f.degree() as i32) * prod.re
}

fn poly_strategy(deg: usize) -> impl Strategy<Value = CtPoly> {
    (prop::collection::vec(-2.0f64..2.0, deg), 0.4f64..2.0, prop::bool::ANY).prop_map(move |(mut c, lead, neg)| {
        c.push(if neg { -lead } else { lead });
        if c[0].abs() < 0.1 {
            c[0] = 0.5;
        }
        CtPoly::new(c)
    })
}

fn sylvester_pair() -> impl Strategy<Value = (CtPoly, CtPoly, usize, usize)> {
    (1usize..=4, 0usize..=3).prop_flat_map(|(n, m)| (poly_strategy(n), poly_strategy(m), Just(n), Just(m)))
}

proptest! {
    #![proptest_config(cfg(100))]

    fn sylvester_determinant_is_signed_resultant((p1, p2, n, m) in sylvester_pair()) {
        let s = build_sylvester(&p1, &p2, n, m).unwrap();
        let res = resultant_by_roots(&p2.shift(1), &p1);
        let scale: f64 = s.entries().row_iter().map(|r| r.norm()).product();
        prop_assert!((s.determinant() - s.resultant_sign() * res).abs() < 1e-9 * scale,
            "det {} res {}", s.determinant(), res);
    }

    fn planted_common_factor_is_detected((q1, q2, n, m) in sylvester_pair(), c in 0.2f64..2.0, neg in prop::bool::ANY) {
        let root = if neg { -c } else { c };
        let factor = CtPoly::from_f64(&[-root, 1.0]);
        let (p1, p2) = (&q1 * &factor, &q2 * &factor);
        let s = build_sylvester(&p1, &p2, n + 1, m + 1).unwrap();
        prop_assert!(s.relative_determinant() < 1e-10, "{}", s.relative_determinant());
        prop_assert!(!s.is_coprime());
    }
}

fn records_are_bit_identical_across_reruns() {
    for sc in [paper_setting1().with_samples(3000), paper_setting2().with_samples(3000)] {
        for seed in [0, 1, u64::MAX] {
            let a = simulate(&sc.with_seed(seed)).unwrap();
            let b = simulate(&sc.with_seed(seed)).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a.y.values()), bits(b.y.values()));
            assert_eq!(bits(a.u.values()), bits(b.u.values()));
            assert_eq!(bits(a.r.values()), bits(b.r.values()));
            assert_eq!(
                a.u_fast.as_ref().map(|s| bits(s.values())),
                b.u_fast.as_ref().map(|s| bits(s.values()))
            );
        }
    }
}

/// Every suite, by name, for callers that time or select them.
pub fn all() -> Vec<(&'static str, fn())> {
    vec![
        ("zoh_maps_poles_through_the_exponential", zoh_maps_poles_through_the_exponential),
        ("zoh_preserves_dc_gain", zoh_preserves_dc_gain),
        ("zoh_second_order_closed_form", zoh_second_order_closed_form),
        ("zoh_first_order_closed_form", zoh_first_order_closed_form),
        ("exponential_of_commuting_sum", exponential_of_commuting_sum),
        ("exponential_matches_taylor_series", exponential_matches_taylor_series),
        ("stability_agrees_with_quadratic_formula", stability_agrees_with_quadratic_formula),
        ("discrete_quadratic_stability", discrete_quadratic_stability),
        ("filtering_is_linear", filtering_is_linear),
        ("derivative_bank_is_self_consistent", derivative_bank_is_self_consistent),
        ("cascading_sampled_filters_does_not_commute", cascading_sampled_filters_does_not_commute),
        ("hold_exact_input_matches_convolution_quadrature", hold_exact_input_matches_convolution_quadrature),
        ("impulse_l1_matches_simpson", impulse_l1_matches_simpson),
        ("sylvester_determinant_is_signed_resultant", sylvester_determinant_is_signed_resultant),
        ("planted_common_factor_is_detected", planted_common_factor_is_detected),
        ("records_are_bit_identical_across_reruns", records_are_bit_identical_across_reruns),
    ]
}
