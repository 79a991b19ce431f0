//! Stroboscopic classical trajectories and growth-rate fits.
//!
//! At `t = NT` the lab-frame phase point is `L^N` applied to the pair
//! `(R(N Omega(T)/2) x, R(N Omega(T)/2) p)`, each spatial component mixing
//! position and momentum through the same 2×2 monodromy power.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hill::{Monodromy, MAX_EXTENSION};
use crate::mat2::{self, Mat2};

const OVERFLOW_MAGNITUDE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub x: [f64; 2],
    pub p: [f64; 2],
}

impl PhaseState {
    pub fn new(x: [f64; 2], p: [f64; 2]) -> Result<Self> {
        if x.iter().chain(&p).all(|v| v.is_finite()) {
            Ok(PhaseState { x, p })
        } else {
            Err(Error::InvalidArgument("phase state must be finite".into()))
        }
    }

    pub fn norm_x(&self) -> f64 {
        self.x[0].hypot(self.x[1])
    }
}

/// `[[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Phase point at `t = NT` for a start at `t = 0`.
pub fn propagate_stroboscopic(
    mono: &Monodromy,
    omega_t: f64,
    state: &PhaseState,
    n: i64,
) -> Result<PhaseState> {
    if !(0..=MAX_EXTENSION).contains(&n) {
        return Err(Error::OverflowRisk {
            n,
            magnitude: f64::INFINITY,
        });
    }
    if n == 0 {
        return Ok(*state);
    }
    let l = mat2::pow(&mono.l_mat, n);
    let magnitude = mat2::max_abs(&l);
    if !(magnitude <= OVERFLOW_MAGNITUDE) {
        return Err(Error::OverflowRisk { n, magnitude });
    }
    let r = rotation(0.5 * n as f64 * omega_t);
    let rx = mat2::apply(&r, state.x);
    let rp = mat2::apply(&r, state.p);
    let mut x = [0.0; 2];
    let mut p = [0.0; 2];
    for i in 0..2 {
        let [xi, pi] = mat2::apply(&l, [rx[i], rp[i]]);
        x[i] = xi;
        p[i] = pi;
    }
    Ok(PhaseState { x, p })
}

/// Stroboscopic orbit for `N = 0..=n_max`.
pub fn orbit(mono: &Monodromy, omega_t: f64, state: &PhaseState, n_max: i64) -> Result<Vec<PhaseState>> {
    (0..=n_max)
        .map(|n| propagate_stroboscopic(mono, omega_t, state, n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GrowthModel {
    Exponential { rate: f64, prefactor: f64 },
    /// `intercept + slope N`, with the leading coefficient of a quadratic
    /// fit as a curvature diagnostic.
    Linear { slope: f64, intercept: f64, quadratic: f64 },
    Bounded { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Relative RMS residual of the selected model (0 for `Bounded`).
    pub fit_quality: f64,
    pub exponential_residual: Option<f64>,
    pub linear_residual: f64,
}

/// Classifies `norms[k] = ||x((n0 + k) T)||` as bounded, linear or exponential.
pub fn growth_fit(norms: &[f64], n0: i64) -> Result<GrowthFit> {
    const NEEDED: usize = 9;
    if norms.len() < NEEDED {
        return Err(Error::InsufficientData {
            needed: NEEDED,
            got: norms.len(),
        });
    }
    if norms.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("norms must be finite and non-negative".into()));
    }
    let ns: Vec<f64> = (0..norms.len()).map(|k| (n0 + k as i64) as f64).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);

    let (intercept, slope) = linear_fit(&ns, norms);
    let quadratic = quadratic_leading(&ns, norms);
    let linear_residual = relative_rms(norms, |k| intercept + slope * ns[k]);

    let exponential = if min > 0.0 {
        let logs: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
        let (c, rate) = linear_fit(&ns, &logs);
        let res = relative_rms(norms, |k| (c + rate * ns[k]).exp());
        Some((rate, c.exp(), res))
    } else {
        None
    };

    if min > 0.0 && max / min < 10.0 {
        return Ok(GrowthFit {
            model: GrowthModel::Bounded { min, max },
            fit_quality: 0.0,
            exponential_residual: exponential.map(|e| e.2),
            linear_residual,
        });
    }
    let linear = GrowthModel::Linear {
        slope,
        intercept,
        quadratic,
    };
    let (model, fit_quality) = match exponential {
        Some((rate, prefactor, res)) if res < linear_residual => {
            (GrowthModel::Exponential { rate, prefactor }, res)
        }
        _ => (linear, linear_residual),
    };
    Ok(GrowthFit {
        model,
        fit_quality,
        exponential_residual: exponential.map(|e| e.2),
        linear_residual,
    })
}

/// Least-squares `y = a + b x`, returned as `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Leading coefficient of the least-squares parabola through `(x, y)`.
fn quadratic_leading(x: &[f64], y: &[f64]) -> f64 {
    // orthogonal polynomials in the centred abscissa avoid the normal equations
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let u: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let m2 = u.iter().map(|v| v * v).sum::<f64>() / n;
    let m3 = u.iter().map(|v| v * v * v).sum::<f64>() / n;
    let q: Vec<f64> = u.iter().map(|v| v * v - m3 / m2 * v - m2).collect();
    let qq: f64 = q.iter().map(|v| v * v).sum();
    q.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / qq
}

fn relative_rms(y: &[f64], model: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (k, v) in y.iter().enumerate() {
        let r = (v - model(k)) / v.abs().max(f64::MIN_POSITIVE);
        acc += r * r;
    }
    (acc / y.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation(0.0), mat2::IDENTITY);
        let q = rotation(PI / 2.0);
        assert!((q[0][1] - 1.0).abs() < 1e-15 && (q[1][0] + 1.0).abs() < 1e-15);
        assert!(q[0][0].abs() < 1e-15);
    }

    #[test]
    fn fit_requires_nine_points() {
        assert_eq!(
            growth_fit(&[1.0; 8], 0),
            Err(Error::InsufficientData { needed: 9, got: 8 })
        );
    }

    #[test]
    fn synthetic_models_are_recognised() {
        let exp: Vec<f64> = (0..12).map(|n| 0.3 * (1.1 * n as f64).exp()).collect();
        match growth_fit(&exp, 0).unwrap().model {
            GrowthModel::Exponential { rate, .. } => assert!((rate - 1.1).abs() < 1e-12),
            m => panic!("{m:?}"),
        }
        let lin: Vec<f64> = (0..12).map(|n| 2.0 * n as f64).collect();
        match growth_fit(&lin, 0).unwrap().model {
            GrowthModel::Linear { slope, quadratic, .. } => {
                assert!((slope - 2.0).abs() < 1e-12);
                assert!(quadratic.abs() < 1e-12);
            }
            m => panic!("{m:?}"),
        }
        let flat: Vec<f64> = (0..12).map(|n| 2.0 + (n as f64).sin()).collect();
        assert!(matches!(
            growth_fit(&flat, 0).unwrap().model,
            GrowthModel::Bounded { .. }
        ));
    }

    #[test]
    fn quadratic_coefficient_of_parabola() {
        let x: Vec<f64> = (3..15).map(|n| n as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v + 0.25 * v * v).collect();
        assert!((quadratic_leading(&x, &y) - 0.25).abs() < 1e-12);
    }
}
