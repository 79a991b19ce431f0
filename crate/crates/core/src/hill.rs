//! Hill's equation `ζ'' + W(t) ζ = 0` with `W = (qB/(2m))^2`.
//!
//! The fundamental matrix `Phi(t) = [[ζ1, ζ2], [ζ1', ζ2']]` satisfies
//! `Phi(t + T) = Phi(t) Phi(T)`, which extends in-period samples to all
//! times through powers of the monodromy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};
use crate::models::{FieldProfile, FieldSpec};

/// Default Wronskian tolerance.
pub const WRONSKIAN_TOL: f64 = 1e-9;
/// Default parabolic band for `|D^2 - 4|`.
pub const TAU_D: f64 = 1e-9;
/// Largest `|N|` accepted for period extension.
pub const MAX_EXTENSION: i64 = 64;
const OVERFLOW_MAGNITUDE: f64 = 1e12;

/// Which fundamental solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Zeta {
    Z1,
    Z2,
}

impl Zeta {
    /// Coefficients of this solution in the basis `(ζ1, ζ2)`.
    pub fn coefficients(self) -> [f64; 2] {
        match self {
            Zeta::Z1 => [1.0, 0.0],
            Zeta::Z2 => [0.0, 1.0],
        }
    }
}

/// Sampled fundamental solutions on one period.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    field: FieldSpec,
    h: f64,
    // (ζ1, ζ1', ζ2, ζ2') at t_k = k h, k = 0..=K
    samples: Vec<[f64; 4]>,
    exact: bool,
    wronskian_drift: f64,
}

/// Monodromy in both the `(ζ, ζ')` and the `(x, p)` normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monodromy {
    pub phi_t: Mat2,
    pub l_mat: Mat2,
    pub period: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityClass {
    pub discriminant: f64,
    pub regime: Regime,
    pub floquet_exponent: Option<f64>,
    pub lambda_tilde: Option<f64>,
    pub zeta2_t_nonzero: bool,
}

/// `A(N)` with `[ζ1; ζ2](t + NT) = A(N) [ζ1; ζ2](t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionCoefficients {
    pub n: i64,
    pub a: Mat2,
}

impl ExtensionCoefficients {
    /// `A_{j,N}` in the row-major numbering 1..=4.
    pub fn entry(&self, j: usize) -> f64 {
        self.a[(j - 1) / 2][(j - 1) % 2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub which: Zeta,
    pub zeros: Vec<f64>,
    pub derivative_at_zero: Vec<f64>,
}

/// Which quotient of fundamental solutions to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ratio {
    /// `ζ1 / ζ2`, defined away from zeros of `ζ2`.
    Z1OverZ2,
    /// `ζ2 / ζ1`, defined away from zeros of `ζ1`.
    Z2OverZ1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub ratio: Ratio,
    pub min_slope: f64,
    pub max_slope: f64,
    pub strictly_increasing: bool,
    pub strictly_decreasing: bool,
    /// `max |d/dt(ratio) * den^2 - s|` with `s = -1` for `ζ1/ζ2`, `+1` for `ζ2/ζ1`.
    pub identity_residual: f64,
    /// Whether the observed direction is the commonly quoted "ζ1/ζ2 increasing, ζ2/ζ1 decreasing".
    pub matches_quoted_orientation: bool,
}

fn hill_step(field: &FieldSpec, t: f64, h: f64, y: [f64; 4]) -> [f64; 4] {
    let rhs = |t: f64, y: [f64; 4]| {
        let w = field.hill_coefficient(t);
        [y[1], -w * y[0], y[3], -w * y[2]]
    };
    let add = |y: [f64; 4], k: [f64; 4], c: f64| {
        [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]]
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = rhs(t + h, add(y, k3, h));
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Transfer matrix for constant `W = a^2` over a duration `tau`.
fn constant_transfer(a: f64, tau: f64) -> Mat2 {
    if a == 0.0 {
        [[1.0, tau], [0.0, 1.0]]
    } else {
        let (s, c) = (a * tau).sin_cos();
        [[c, s / a], [-a * s, c]]
    }
}

fn pack(phi: &Mat2) -> [f64; 4] {
    [phi[0][0], phi[1][0], phi[0][1], phi[1][1]]
}

fn unpack(y: &[f64; 4]) -> Mat2 {
    [[y[0], y[2]], [y[1], y[3]]]
}

impl FundamentalPair {
    /// Integrates both fundamental solutions with step `h <= T/256`.
    ///
    /// The step is shrunk to `T / ceil(T/h)` so that samples land on `T`.
    pub fn integrate(field: &FieldSpec, h: f64) -> Result<Self> {
        Self::integrate_with_tol(field, h, WRONSKIAN_TOL)
    }

    /// Default resolution `h = T/4096`.
    pub fn new(field: &FieldSpec) -> Result<Self> {
        Self::integrate(field, field.period() / 4096.0)
    }

    pub fn integrate_with_tol(field: &FieldSpec, h: f64, wronskian_tol: f64) -> Result<Self> {
        let period = field.period();
        if !(h > 0.0 && h <= period / 256.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "step h = {h} must lie in (0, T/256]"
            )));
        }
        let k = (period / h - 1e-9).ceil().max(1.0) as usize;
        let h = period / k as f64;
        let exact = field.is_piecewise_constant();
        let mut samples = Vec::with_capacity(k + 1);
        if exact {
            for i in 0..=k {
                let t = if i == k { period } else { i as f64 * h };
                samples.push(pack(&exact_phi(field, t)));
            }
        } else {
            let mut y = [1.0, 0.0, 0.0, 1.0];
            samples.push(y);
            for i in 0..k {
                y = hill_step(field, i as f64 * h, h, y);
                samples.push(y);
            }
        }
        let wronskian_drift = samples
            .iter()
            .map(|y| (y[0] * y[3] - y[1] * y[2] - 1.0).abs())
            .fold(0.0, f64::max);
        if wronskian_drift > wronskian_tol {
            return Err(Error::StepTooCoarse {
                drift: wronskian_drift,
                tol: wronskian_tol,
            });
        }
        Ok(FundamentalPair {
            field: field.clone(),
            h,
            samples,
            exact,
            wronskian_drift,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn step(&self) -> f64 {
        self.h
    }
    pub fn period(&self) -> f64 {
        self.field.period()
    }
    pub fn wronskian_drift(&self) -> f64 {
        self.wronskian_drift
    }
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Sample times and `(ζ1, ζ1', ζ2, ζ2')` values.
    pub fn samples(&self) -> impl Iterator<Item = (f64, [f64; 4])> + '_ {
        let k = self.samples.len() - 1;
        self.samples.iter().enumerate().map(move |(i, y)| {
            let t = if i == k { self.period() } else { i as f64 * self.h };
            (t, *y)
        })
    }

    pub fn monodromy(&self) -> Monodromy {
        let phi_t = unpack(&self.samples[self.samples.len() - 1]);
        let m = self.field.mass();
        Monodromy {
            phi_t,
            l_mat: [[phi_t[0][0], phi_t[0][1] / m], [m * phi_t[1][0], phi_t[1][1]]],
            period: self.period(),
            mass: m,
        }
    }

    /// `Phi(s)` for `s` in `[0, T]`.
    pub fn phi_in_period(&self, s: f64) -> Mat2 {
        let period = self.period();
        let s = s.clamp(0.0, period);
        if self.exact {
            return exact_phi(&self.field, s);
        }
        let k = self.samples.len() - 1;
        let i = ((s / self.h).floor() as usize).min(k - 1);
        let t0 = i as f64 * self.h;
        let u = (s - t0) / self.h;
        let (y0, y1) = (&self.samples[i], &self.samples[i + 1]);
        let w0 = self.field.hill_coefficient(t0);
        let w1 = self.field.hill_coefficient(t0 + self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let hermite = |v0: f64, d0: f64, v1: f64, d1: f64| {
            h00 * v0 + h10 * self.h * d0 + h01 * v1 + h11 * self.h * d1
        };
        let mut out = [0.0; 4];
        for c in [0, 2] {
            out[c] = hermite(y0[c], y0[c + 1], y1[c], y1[c + 1]);
            out[c + 1] = hermite(y0[c + 1], -w0 * y0[c], y1[c + 1], -w1 * y1[c]);
        }
        unpack(&out)
    }

    /// `Phi(t)` for any real `t`, via `Phi(NT + s) = Phi(s) Phi(T)^N`.
    pub fn phi(&self, t: f64) -> Result<Mat2> {
        let period = self.period();
        let n = (t / period).floor();
        let mut s = t - n * period;
        let mut n = n as i64;
        if s >= period {
            s -= period;
            n += 1;
        }
        if n == 0 {
            return Ok(self.phi_in_period(s));
        }
        let ext = extension_coefficients(&self.monodromy(), n)?;
        Ok(mat2::mul(&self.phi_in_period(s), &mat2::transpose(&ext.a)))
    }

    /// `(ζ_j(t), ζ_j'(t))` for any real `t`.
    pub fn evaluate_zeta(&self, which: Zeta, t: f64) -> Result<(f64, f64)> {
        let phi = self.phi(t)?;
        let c = match which {
            Zeta::Z1 => 0,
            Zeta::Z2 => 1,
        };
        Ok((phi[0][c], phi[1][c]))
    }

    /// Zeros of `ζ_j` on `[0, T)`.
    pub fn find_zeros(&self, which: Zeta) -> Result<ZeroSet> {
        let (zeros, derivative_at_zero) = self.zeros_of_combination(which.coefficients())?;
        Ok(ZeroSet {
            which,
            zeros,
            derivative_at_zero,
        })
    }

    /// Zeros on `[0, T)` of `f = c1 ζ1 + c2 ζ2`, with `f'` at each zero.
    pub fn zeros_of_combination(&self, c: [f64; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
        let eval = |t: f64| {
            let phi = self.phi_in_period(t);
            (
                c[0] * phi[0][0] + c[1] * phi[0][1],
                c[0] * phi[1][0] + c[1] * phi[1][1],
            )
        };
        let grid: Vec<(f64, [f64; 4])> = self.samples().collect();
        let value = |y: &[f64; 4]| c[0] * y[0] + c[1] * y[2];
        let scale = c[0].abs() + c[1].abs();
        let mut zeros = Vec::new();
        let mut derivs = Vec::new();
        for w in grid.windows(2) {
            let (ta, ya) = w[0];
            let (tb, yb) = w[1];
            let (fa, fb) = (value(&ya), value(&yb));
            let t0 = if fa == 0.0 {
                ta
            } else if fb != 0.0 && fa.signum() != fb.signum() {
                let (mut lo, mut hi, mut flo) = (ta, tb, fa);
                while hi - lo > 1e-13 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = eval(mid).0;
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            } else {
                continue;
            };
            let d = eval(t0).1;
            if d.abs() < 1e-8 * scale {
                return Err(Error::DegenerateZero { t: t0, derivative: d });
            }
            zeros.push(t0);
            derivs.push(d);
        }
        Ok((zeros, derivs))
    }

    /// Finite-difference check of the sign of `d/dt` of a solution quotient
    /// on `(a, b)`, together with the Wronskian identity residual.
    pub fn ratio_monotonicity_check(&self, ratio: Ratio, a: f64, b: f64) -> Result<MonotonicityReport> {
        let period = self.period();
        if !(0.0 <= a && a < b && b <= period) {
            return Err(Error::InvalidArgument(format!(
                "interval ({a}, {b}) must be a sub-interval of [0, {period}]"
            )));
        }
        let den = match ratio {
            Ratio::Z1OverZ2 => Zeta::Z2,
            Ratio::Z2OverZ1 => Zeta::Z1,
        };
        let zs = self.find_zeros(den)?;
        if let Some(&t) = zs.zeros.iter().find(|&&t| t >= a && t <= b) {
            return Err(Error::IntervalContainsZero { a, b, t });
        }
        // a zero sitting exactly at T counts through the next period's t = 0
        if den == Zeta::Z2 && b == period && self.phi_in_period(period)[0][1] == 0.0 {
            return Err(Error::IntervalContainsZero { a, b, t: period });
        }
        let q = |t: f64| {
            let phi = self.phi_in_period(t);
            let (z1, z2) = (phi[0][0], phi[0][1]);
            match ratio {
                Ratio::Z1OverZ2 => (z1 / z2, z2),
                Ratio::Z2OverZ1 => (z2 / z1, z1),
            }
        };
        let expected = match ratio {
            Ratio::Z1OverZ2 => -1.0,
            Ratio::Z2OverZ1 => 1.0,
        };
        let points = 100;
        let delta = 1e-4 * (b - a) / points as f64;
        let mut min_slope = f64::INFINITY;
        let mut max_slope = f64::NEG_INFINITY;
        let mut residual: f64 = 0.0;
        for k in 0..points {
            let t = a + (b - a) * (k as f64 + 0.5) / points as f64;
            let slope = (q(t + delta).0 - q(t - delta).0) / (2.0 * delta);
            let d = q(t).1;
            min_slope = min_slope.min(slope);
            max_slope = max_slope.max(slope);
            residual = residual.max((slope * d * d - expected).abs());
        }
        let strictly_increasing = min_slope > 0.0;
        let strictly_decreasing = max_slope < 0.0;
        let matches_quoted_orientation = match ratio {
            Ratio::Z1OverZ2 => strictly_increasing,
            Ratio::Z2OverZ1 => strictly_decreasing,
        };
        Ok(MonotonicityReport {
            ratio,
            min_slope,
            max_slope,
            strictly_increasing,
            strictly_decreasing,
            identity_residual: residual,
            matches_quoted_orientation,
        })
    }
}

/// Closed-form `Phi(s)` for piecewise-constant profiles, `s` in `[0, T]`.
fn exact_phi(field: &FieldSpec, s: f64) -> Mat2 {
    let a_of = |b: f64| (field.charge() * b / (2.0 * field.mass())).abs();
    match field.profile() {
        FieldProfile::Constant { b0 } => constant_transfer(a_of(*b0), s),
        FieldProfile::Pulsed { b0, t0 } => {
            let a = a_of(*b0);
            if s <= *t0 {
                constant_transfer(a, s)
            } else {
                mat2::mul(&constant_transfer(0.0, s - t0), &constant_transfer(a, *t0))
            }
        }
        _ => unreachable!("closed form only for piecewise-constant profiles"),
    }
}

impl Monodromy {
    pub fn discriminant(&self) -> f64 {
        mat2::trace(&self.phi_t)
    }

    pub fn det(&self) -> f64 {
        mat2::det(&self.phi_t)
    }

    pub fn classify(&self, tau_d: f64) -> StabilityClass {
        classify(self, tau_d)
    }
}

pub fn classify(mono: &Monodromy, tau_d: f64) -> StabilityClass {
    let d = mono.discriminant();
    let gap = d * d - 4.0;
    let regime = if gap.abs() <= tau_d {
        Regime::Parabolic
    } else if gap > 0.0 {
        Regime::Hyperbolic
    } else {
        Regime::Elliptic
    };
    let (floquet_exponent, lambda_tilde) = if regime == Regime::Hyperbolic {
        let lambda = ((d.abs() + gap.sqrt()) / 2.0).ln();
        let [_, (mu_min, _)] = mat2::eigenvalues(&mono.phi_t);
        (Some(lambda), Some(mu_min.abs().ln()))
    } else {
        (None, None)
    };
    StabilityClass {
        discriminant: d,
        regime,
        floquet_exponent,
        lambda_tilde,
        zeta2_t_nonzero: mono.phi_t[0][1].abs() > tau_d,
    }
}

/// `A(N) = (Phi_T^T)^N`, refusing `|N| > 64` or entries above `1e12`.
pub fn extension_coefficients(mono: &Monodromy, n: i64) -> Result<ExtensionCoefficients> {
    if n.abs() > MAX_EXTENSION {
        return Err(Error::OverflowRisk {
            n,
            magnitude: f64::INFINITY,
        });
    }
    let a = mat2::pow(&mat2::transpose(&mono.phi_t), n);
    let magnitude = mat2::max_abs(&a);
    if !(magnitude <= OVERFLOW_MAGNITUDE) {
        return Err(Error::OverflowRisk { n, magnitude });
    }
    Ok(ExtensionCoefficients { n, a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pulsed() -> FieldSpec {
        FieldSpec::pulsed(7.0 * PI / 4.0, 1.0, 1.0, 2.0, 3.0 * PI / 4.0).unwrap()
    }

    #[test]
    fn zero_field_is_free_flight() {
        let f = FieldSpec::constant(1.0, 1.0, 1.0, 0.0).unwrap();
        let pair = FundamentalPair::new(&f).unwrap();
        for (t, y) in pair.samples() {
            assert_eq!(y[0], 1.0);
            assert!((y[2] - t).abs() < 1e-15);
        }
        assert_eq!(pair.monodromy().phi_t, [[1.0, 1.0], [0.0, 1.0]]);
        let c = pair.monodromy().classify(TAU_D);
        assert_eq!(c.regime, Regime::Parabolic);
        assert_eq!(c.discriminant, 2.0);
        assert!((pair.evaluate_zeta(Zeta::Z2, 7.25).unwrap().0 - 7.25).abs() < 1e-12);
    }

    #[test]
    fn pulsed_monodromy_closed_form() {
        let mono = FundamentalPair::new(&pulsed()).unwrap().monodromy();
        let (s, c) = (0.75 * PI).sin_cos();
        let oracle = mat2::mul(&[[1.0, PI], [0.0, 1.0]], &[[c, s], [-s, c]]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((mono.phi_t[i][j] - oracle[i][j]).abs() < 1e-12);
            }
        }
        let cls = mono.classify(TAU_D);
        assert_eq!(cls.regime, Regime::Hyperbolic);
        assert!(cls.zeta2_t_nonzero);
        let d = 2.0 * c - PI * s;
        let lambda = ((d.abs() + (d * d - 4.0).sqrt()) / 2.0).ln();
        assert!((cls.floquet_exponent.unwrap() - lambda).abs() < 1e-12);
        assert!((cls.lambda_tilde.unwrap() + lambda).abs() < 1e-10);
    }

    #[test]
    fn constant_field_elliptic_and_minus_identity() {
        let f = FieldSpec::constant(2.0, 1.0, 1.0, 2.0).unwrap();
        let cls = FundamentalPair::new(&f).unwrap().monodromy().classify(TAU_D);
        assert_eq!(cls.regime, Regime::Elliptic);
        assert!((cls.discriminant - 2.0 * 2.0_f64.cos()).abs() < 1e-12);
        let g = FieldSpec::constant(PI, 1.0, 1.0, 2.0).unwrap();
        let m = FundamentalPair::new(&g).unwrap().monodromy();
        assert!((m.phi_t[0][0] + 1.0).abs() < 1e-12 && (m.phi_t[1][1] + 1.0).abs() < 1e-12);
        assert!(m.phi_t[0][1].abs() < 1e-12 && m.phi_t[1][0].abs() < 1e-12);
    }

    #[test]
    fn coarse_step_is_rejected() {
        let f = pulsed();
        assert!(matches!(
            FundamentalPair::integrate(&f, f.period() / 100.0),
            Err(Error::InvalidArgument(_))
        ));
        let g = FieldSpec::sinusoidal(1.0, 1.0, 1.0, 40.0, 30.0).unwrap();
        assert!(matches!(
            FundamentalPair::integrate(&g, 1.0 / 256.0),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn extension_identity_and_overflow() {
        let mono = FundamentalPair::new(&pulsed()).unwrap().monodromy();
        assert_eq!(extension_coefficients(&mono, 0).unwrap().a, mat2::IDENTITY);
        let a1 = extension_coefficients(&mono, 1).unwrap();
        assert_eq!(a1.entry(1), mono.phi_t[0][0]);
        assert_eq!(a1.entry(2), mono.phi_t[1][0]);
        assert_eq!(a1.entry(3), mono.phi_t[0][1]);
        assert_eq!(a1.entry(4), mono.phi_t[1][1]);
        assert!(matches!(
            extension_coefficients(&mono, 65),
            Err(Error::OverflowRisk { .. })
        ));
        assert!(matches!(
            extension_coefficients(&mono, 40),
            Err(Error::OverflowRisk { .. })
        ));
    }

    #[test]
    fn zeros_of_constant_field() {
        let f = FieldSpec::constant(7.0, 1.0, 1.0, 2.0).unwrap();
        let z = FundamentalPair::new(&f).unwrap().find_zeros(Zeta::Z2).unwrap();
        assert_eq!(z.zeros.len(), 3);
        for (k, (t, d)) in z.zeros.iter().zip(&z.derivative_at_zero).enumerate() {
            assert!((t - k as f64 * PI).abs() < 1e-12);
            assert!((d - if k % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn pulsed_zeta1_single_zero() {
        let z = FundamentalPair::new(&pulsed()).unwrap().find_zeros(Zeta::Z1).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert!((z.zeros[0] - PI / 2.0).abs() < 1e-12);
    }
}
