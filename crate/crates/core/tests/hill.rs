use std::f64::consts::PI;

use magfloquet::hill::{
    extension_coefficients, FundamentalPair, Ratio, Regime, Zeta, TAU_D,
};
use magfloquet::mat2;
use magfloquet::models::{FieldProfile, FieldSpec, Interpolation};
use magfloquet::Error;
use proptest::prelude::*;

fn pulsed() -> FieldSpec {
    FieldSpec::pulsed(7.0 * PI / 4.0, 1.0, 1.0, 2.0, 3.0 * PI / 4.0).unwrap()
}

fn sampled() -> FieldSpec {
    let n = 32;
    let times: Vec<f64> = (0..=n).map(|k| 3.0 * k as f64 / n as f64).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|t| 1.5 + (2.0 * PI * t / 3.0).sin())
        .collect();
    FieldSpec::new(
        3.0,
        1.0,
        1.0,
        FieldProfile::Sampled {
            times,
            values,
            interpolation: Interpolation::Linear,
        },
    )
    .unwrap()
}

/// Reference RK4 on `[0, t]` with a step that lands on the pulse switch.
fn direct_pulsed(field: &FieldSpec, t: f64) -> [f64; 4] {
    let period = field.period();
    let mut knots = vec![0.0];
    let mut k = 0.0;
    while k * period < t {
        for s in [0.75 * PI, period] {
            let p = k * period + s;
            if p < t {
                knots.push(p);
            }
        }
        k += 1.0;
    }
    knots.push(t);
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for w in knots.windows(2) {
        let steps = 2000;
        let h = (w[1] - w[0]) / steps as f64;
        let mid = 0.5 * (w[0] + w[1]);
        let a2 = field.hill_coefficient(mid);
        let f = |y: [f64; 4]| [y[1], -a2 * y[0], y[3], -a2 * y[2]];
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f(std::array::from_fn(|i| y[i] + h * k3[i]));
            y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
    }
    y
}

#[test]
fn wronskian_for_every_builtin_profile() {
    let fields = [
        FieldSpec::constant(2.0, 1.0, 1.0, 2.0).unwrap(),
        pulsed(),
        FieldSpec::sinusoidal(2.0 * PI, 1.0, 1.0, 1.0, 0.5).unwrap(),
        sampled(),
    ];
    for f in &fields {
        let pair = FundamentalPair::integrate(f, f.period() / 4096.0).unwrap();
        assert!(pair.wronskian_drift() <= 1e-9, "{:?}", f.profile());
        let det = pair.monodromy().det();
        assert!((det - 1.0).abs() <= 1e-9);
        let [(a, _), (b, _)] = mat2::eigenvalues(&pair.monodromy().phi_t);
        let [(_, ai), (_, bi)] = mat2::eigenvalues(&pair.monodromy().phi_t);
        let prod = if ai == 0.0 { a * b } else { a * a + ai * bi.abs() };
        assert!((prod - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn integrated_constant_field_matches_trig() {
    // a sinusoidal profile with zero AC part goes through the RK4 path
    let f = FieldSpec::sinusoidal(2.0 * PI, 1.0, 1.0, 2.0, 0.0).unwrap();
    let pair = FundamentalPair::new(&f).unwrap();
    assert!(!pair.is_exact());
    let mut err: f64 = 0.0;
    for (t, y) in pair.samples() {
        err = err.max((y[0] - t.cos()).abs()).max((y[2] - t.sin()).abs());
    }
    assert!(err <= 1e-8, "{err}");
    for k in 0..50 {
        let t = 0.1234 + 0.1 * k as f64;
        let phi = pair.phi_in_period(t);
        assert!((phi[0][1] - t.sin()).abs() < 1e-8);
        assert!((phi[1][1] - t.cos()).abs() < 1e-8);
    }
    let (z2, _) = pair.evaluate_zeta(Zeta::Z2, 10.0).unwrap();
    assert!((z2 - 10.0_f64.sin()).abs() < 1e-7);
}

#[test]
fn monodromy_and_l_matrix_share_determinant() {
    let f = FieldSpec::pulsed(7.0 * PI / 4.0, 2.0, 1.0, 4.0, 3.0 * PI / 4.0).unwrap();
    let m = FundamentalPair::new(&f).unwrap().monodromy();
    assert!((mat2::det(&m.l_mat) - 1.0).abs() < 1e-12);
    assert_eq!(m.l_mat[0][1], m.phi_t[0][1] / 2.0);
    assert_eq!(m.l_mat[1][0], 2.0 * m.phi_t[1][0]);
}

#[test]
fn pulsed_classification() {
    let cls = FundamentalPair::new(&pulsed()).unwrap().monodromy().classify(TAU_D);
    assert_eq!(cls.regime, Regime::Hyperbolic);
    assert!((cls.discriminant + 3.635655).abs() < 1e-5);
    assert!((cls.floquet_exponent.unwrap() - 1.204738).abs() < 1e-5);
    assert!(cls.zeta2_t_nonzero);
}

#[test]
fn first_extension_reproduces_next_period() {
    for f in [pulsed(), FieldSpec::sinusoidal(2.0, 1.0, 1.0, 1.5, 1.0).unwrap()] {
        let pair = FundamentalPair::new(&f).unwrap();
        let a = extension_coefficients(&pair.monodromy(), 1).unwrap();
        let period = f.period();
        for k in 0..16 {
            let t = period * k as f64 / 16.0 + 0.01;
            let now = pair.phi_in_period(t);
            // oracle: continue the ODE from t over one full period
            let later = if f.is_piecewise_constant() {
                direct_pulsed(&f, t + period)
            } else {
                let mut y = [1.0, 0.0, 0.0, 1.0];
                let steps = 40_000;
                let h = (t + period) / steps as f64;
                for i in 0..steps {
                    let s = i as f64 * h;
                    let rhs = |s: f64, y: [f64; 4]| {
                        let w = f.hill_coefficient(s);
                        [y[1], -w * y[0], y[3], -w * y[2]]
                    };
                    let k1 = rhs(s, y);
                    let k2 = rhs(s + 0.5 * h, std::array::from_fn(|j| y[j] + 0.5 * h * k1[j]));
                    let k3 = rhs(s + 0.5 * h, std::array::from_fn(|j| y[j] + 0.5 * h * k2[j]));
                    let k4 = rhs(s + h, std::array::from_fn(|j| y[j] + h * k3[j]));
                    y = std::array::from_fn(|j| {
                        y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                    });
                }
                y
            };
            let z1 = a.entry(1) * now[0][0] + a.entry(2) * now[0][1];
            let z2 = a.entry(3) * now[0][0] + a.entry(4) * now[0][1];
            assert!((z1 - later[0]).abs() <= 1e-7, "{z1} vs {}", later[0]);
            assert!((z2 - later[2]).abs() <= 1e-7, "{z2} vs {}", later[2]);
        }
    }
}

#[test]
fn evaluate_zeta_after_three_periods() {
    let f = pulsed();
    let pair = FundamentalPair::new(&f).unwrap();
    let t = 3.0 * f.period() + 0.5;
    let direct = direct_pulsed(&f, t);
    let (z1, d1) = pair.evaluate_zeta(Zeta::Z1, t).unwrap();
    let (z2, d2) = pair.evaluate_zeta(Zeta::Z2, t).unwrap();
    for (got, want) in [(z1, direct[0]), (d1, direct[1]), (z2, direct[2]), (d2, direct[3])] {
        assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
    }
}

#[test]
fn evaluate_zeta_is_continuous_across_seams() {
    let f = FieldSpec::sinusoidal(2.0, 1.0, 1.0, 1.5, 1.0).unwrap();
    let pair = FundamentalPair::new(&f).unwrap();
    for n in 1..6 {
        let seam = n as f64 * 2.0;
        for z in [Zeta::Z1, Zeta::Z2] {
            let (l, _) = pair.evaluate_zeta(z, seam - 1e-12).unwrap();
            let (r, _) = pair.evaluate_zeta(z, seam).unwrap();
            assert!((l - r).abs() <= 1e-8 * (1.0 + r.abs()));
        }
    }
}

fn log_slope(ns: &[i64], ys: &[f64]) -> f64 {
    let n = ns.len() as f64;
    let mx = ns.iter().map(|&x| x as f64).sum::<f64>() / n;
    let my = ys.iter().map(|y| y.ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in ns.iter().zip(ys) {
        num += (*x as f64 - mx) * (y.ln() - my);
        den += (*x as f64 - mx).powi(2);
    }
    num / den
}

#[test]
fn extension_growth_matches_floquet_exponent() {
    let mono = FundamentalPair::new(&pulsed()).unwrap().monodromy();
    let lambda = mono.classify(TAU_D).floquet_exponent.unwrap();
    let ns: Vec<i64> = (5..=15).collect();
    let a3: Vec<f64> = ns
        .iter()
        .map(|&n| extension_coefficients(&mono, n).unwrap().entry(3).abs())
        .collect();
    let a4: Vec<f64> = ns
        .iter()
        .map(|&n| extension_coefficients(&mono, n).unwrap().entry(4).abs())
        .collect();
    assert!((log_slope(&ns, &a3) - lambda).abs() <= 0.01 * lambda);
    let s4 = log_slope(&ns, &a4);
    assert!(s4 >= -lambda - 0.01 && s4 <= lambda + 0.01);
    // negative N grows like e^{lambda |N|}
    let neg: Vec<i64> = (-15..=-5).collect();
    let a3n: Vec<f64> = neg
        .iter()
        .map(|&n| extension_coefficients(&mono, n).unwrap().entry(3).abs())
        .collect();
    assert!((log_slope(&neg, &a3n) + lambda).abs() <= 0.01 * lambda);
    let five = extension_coefficients(&mono, 5).unwrap().entry(3).abs();
    let ratio = five / (5.0 * lambda).exp();
    assert!(ratio > 0.1 && ratio < 10.0, "{ratio}");
}

proptest! {
    #[test]
    fn extension_group_law(n1 in -20i64..=20, n2 in -20i64..=20) {
        let f = FieldSpec::sinusoidal(2.0, 1.0, 1.0, 1.0, 0.4).unwrap();
        let mono = FundamentalPair::new(&f).unwrap().monodromy();
        let a = extension_coefficients(&mono, n1).unwrap().a;
        let b = extension_coefficients(&mono, n2).unwrap().a;
        let ab = extension_coefficients(&mono, n1 + n2).unwrap().a;
        let prod = mat2::mul(&a, &b);
        let scale = 1.0 + mat2::max_abs(&ab);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((prod[i][j] - ab[i][j]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn pulsed_group_law(n1 in -10i64..=10, n2 in -10i64..=10) {
        let mono = FundamentalPair::new(&pulsed()).unwrap().monodromy();
        let a = extension_coefficients(&mono, n1).unwrap().a;
        let b = extension_coefficients(&mono, n2).unwrap().a;
        let ab = extension_coefficients(&mono, n1 + n2).unwrap().a;
        let prod = mat2::mul(&a, &b);
        // mixed-sign powers cancel, so the error is relative to the factors
        let scale = mat2::max_abs(&a) * mat2::max_abs(&b);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((prod[i][j] - ab[i][j]).abs() <= 1e-8 * scale);
            }
        }
    }
}

#[test]
fn zeros_are_simple_and_sign_alternates() {
    for f in [pulsed(), sampled(), FieldSpec::sinusoidal(6.0, 1.0, 1.0, 2.0, 1.0).unwrap()] {
        let pair = FundamentalPair::new(&f).unwrap();
        for (z, other) in [(Zeta::Z1, 1), (Zeta::Z2, 0)] {
            let set = pair.find_zeros(z).unwrap();
            let max_other = pair
                .samples()
                .map(|(_, y)| y[if other == 0 { 0 } else { 2 }].abs())
                .fold(0.0, f64::max);
            for w in set.derivative_at_zero.windows(2) {
                assert!(w[0] * w[1] < 0.0);
            }
            for d in &set.derivative_at_zero {
                assert!(d.abs() >= (1.0 - 1e-6) / max_other);
            }
            for t in &set.zeros {
                let (v, _) = pair.evaluate_zeta(z, *t).unwrap();
                assert!(v.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn zero_field_zeta2_zero_at_origin() {
    let f = FieldSpec::constant(1.0, 1.0, 1.0, 0.0).unwrap();
    let set = FundamentalPair::new(&f).unwrap().find_zeros(Zeta::Z2).unwrap();
    assert_eq!(set.zeros, vec![0.0]);
    assert_eq!(set.derivative_at_zero, vec![1.0]);
    let none = FundamentalPair::new(&f).unwrap().find_zeros(Zeta::Z1).unwrap();
    assert!(none.zeros.is_empty());
}

#[test]
fn quotient_monotonicity_follows_wronskian() {
    let free = FieldSpec::constant(1.0, 1.0, 1.0, 0.0).unwrap();
    let pair = FundamentalPair::new(&free).unwrap();
    let r = pair.ratio_monotonicity_check(Ratio::Z1OverZ2, 0.1, 0.9).unwrap();
    assert!(r.strictly_decreasing);
    assert!(!r.matches_quoted_orientation);
    assert!(r.identity_residual <= 1e-6);
    let r = pair.ratio_monotonicity_check(Ratio::Z2OverZ1, 0.1, 0.9).unwrap();
    assert!(r.strictly_increasing);
    assert!(r.identity_residual <= 1e-6);

    let c = FieldSpec::constant(2.0, 1.0, 1.0, 2.0).unwrap();
    let pair = FundamentalPair::new(&c).unwrap();
    let r = pair.ratio_monotonicity_check(Ratio::Z1OverZ2, 0.2, 1.2).unwrap();
    // |d/dt cot t| = 1 / sin^2 t
    let last: f64 = 0.2 + 0.995;
    let exact = -1.0 / last.sin().powi(2);
    assert!((r.max_slope - exact).abs() <= 1e-5 * exact.abs());
    assert!(r.identity_residual <= 1e-6);

    for f in [pulsed(), sampled()] {
        let pair = FundamentalPair::new(&f).unwrap();
        let zs = pair.find_zeros(Zeta::Z2).unwrap().zeros;
        let end = zs.get(1).copied().unwrap_or(f.period());
        let r = pair
            .ratio_monotonicity_check(Ratio::Z1OverZ2, 0.05 * end, 0.95 * end)
            .unwrap();
        assert!(r.identity_residual <= 1e-6, "{}", r.identity_residual);
    }
}

#[test]
fn monotonicity_rejects_zero_crossing() {
    let c = FieldSpec::constant(7.0, 1.0, 1.0, 2.0).unwrap();
    let pair = FundamentalPair::new(&c).unwrap();
    assert!(matches!(
        pair.ratio_monotonicity_check(Ratio::Z1OverZ2, 3.0, 3.5),
        Err(Error::IntervalContainsZero { .. })
    ));
}
