//! Magnetic-field profiles and radial scattering potentials.
//!
//! A [`FieldSpec`] holds the periodic intensity `B(t)` together with the
//! particle constants; a [`PotentialSpec`] holds the radial power law
//! `V(x) = v0 (1 + |x|^2)^(-rho/2)` and its factorisation `V = rho1 * rho2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    Cubic,
}

/// Shape of `B(t)` on one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldProfile {
    Constant {
        b0: f64,
    },
    /// `b0` on `[0, t0)`, zero on `[t0, T)`.
    Pulsed {
        b0: f64,
        t0: f64,
    },
    /// `bdc + bac * cos(2 pi t / T)`.
    Sinusoidal {
        bdc: f64,
        bac: f64,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    period: f64,
    mass: f64,
    charge: f64,
    profile: FieldProfile,
}

/// Periodic field `B(t)` with particle mass, charge and period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct FieldSpec {
    period: f64,
    mass: f64,
    charge: f64,
    profile: FieldProfile,
    // second derivatives of the periodic cubic spline (Sampled + Cubic only)
    spline: Vec<f64>,
}

impl TryFrom<RawField> for FieldSpec {
    type Error = Error;
    fn try_from(raw: RawField) -> Result<Self> {
        FieldSpec::new(raw.period, raw.mass, raw.charge, raw.profile)
    }
}

impl From<FieldSpec> for RawField {
    fn from(f: FieldSpec) -> Self {
        RawField {
            period: f.period,
            mass: f.mass,
            charge: f.charge,
            profile: f.profile,
        }
    }
}

impl FieldSpec {
    pub fn new(period: f64, mass: f64, charge: f64, profile: FieldProfile) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidField(format!("period must be > 0, got {period}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidField(format!("mass must be > 0, got {mass}")));
        }
        if !charge.is_finite() || charge == 0.0 {
            return Err(Error::InvalidField(format!("charge must be nonzero, got {charge}")));
        }
        let mut spline = Vec::new();
        match &profile {
            FieldProfile::Constant { b0 } => check_finite("b0", *b0)?,
            FieldProfile::Pulsed { b0, t0 } => {
                check_finite("b0", *b0)?;
                if !(*t0 > 0.0 && *t0 < period) {
                    return Err(Error::InvalidField(format!(
                        "pulse length t0 = {t0} must lie in (0, {period})"
                    )));
                }
            }
            FieldProfile::Sinusoidal { bdc, bac } => {
                check_finite("bdc", *bdc)?;
                check_finite("bac", *bac)?;
            }
            FieldProfile::Sampled {
                times,
                values,
                interpolation,
            } => {
                validate_samples(period, times, values, *interpolation)?;
                if *interpolation == Interpolation::Cubic {
                    spline = periodic_spline(times, values);
                }
            }
        }
        Ok(FieldSpec {
            period,
            mass,
            charge,
            profile,
            spline,
        })
    }

    pub fn constant(period: f64, mass: f64, charge: f64, b0: f64) -> Result<Self> {
        Self::new(period, mass, charge, FieldProfile::Constant { b0 })
    }

    pub fn pulsed(period: f64, mass: f64, charge: f64, b0: f64, t0: f64) -> Result<Self> {
        Self::new(period, mass, charge, FieldProfile::Pulsed { b0, t0 })
    }

    pub fn sinusoidal(period: f64, mass: f64, charge: f64, bdc: f64, bac: f64) -> Result<Self> {
        Self::new(period, mass, charge, FieldProfile::Sinusoidal { bdc, bac })
    }

    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn charge(&self) -> f64 {
        self.charge
    }
    pub fn profile(&self) -> &FieldProfile {
        &self.profile
    }

    /// `B(t mod T)`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        self.evaluate_in_period(s)
    }

    fn evaluate_in_period(&self, s: f64) -> f64 {
        match &self.profile {
            FieldProfile::Constant { b0 } => *b0,
            FieldProfile::Pulsed { b0, t0 } => {
                if s < *t0 {
                    *b0
                } else {
                    0.0
                }
            }
            FieldProfile::Sinusoidal { bdc, bac } => bdc + bac * (2.0 * PI * s / self.period).cos(),
            FieldProfile::Sampled {
                times,
                values,
                interpolation,
            } => {
                let i = match times.partition_point(|&x| x <= s) {
                    0 => 0,
                    k => (k - 1).min(times.len() - 2),
                };
                let h = times[i + 1] - times[i];
                let u = (s - times[i]) / h;
                match interpolation {
                    Interpolation::Linear => values[i] + u * (values[i + 1] - values[i]),
                    Interpolation::Cubic => {
                        let (m0, m1) = (self.spline[i], self.spline[(i + 1) % self.spline.len()]);
                        let a = 1.0 - u;
                        a * values[i]
                            + u * values[i + 1]
                            + h * h / 6.0 * ((a * a * a - a) * m0 + (u * u * u - u) * m1)
                    }
                }
            }
        }
    }

    /// Cyclotron frequency `q B(t) / m`.
    pub fn omega(&self, t: f64) -> f64 {
        self.charge * self.evaluate(t) / self.mass
    }

    /// Coefficient `(q B(t) / (2m))^2` of Hill's equation.
    pub fn hill_coefficient(&self, t: f64) -> f64 {
        let a = 0.5 * self.omega(t);
        a * a
    }

    /// Points in `(0, T)` where `B` or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            FieldProfile::Pulsed { t0, .. } => vec![*t0],
            FieldProfile::Sampled { times, .. } => times[1..times.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// Breakpoints (including period seams) strictly inside `(a, b)`.
    pub fn breakpoints_between(&self, a: f64, b: f64) -> Vec<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t = self.period;
        let mut local = vec![0.0];
        local.extend(self.breakpoints());
        let mut out = Vec::new();
        let first = (lo / t).floor() as i64;
        let last = (hi / t).ceil() as i64;
        for k in first..=last {
            for &s in &local {
                let p = k as f64 * t + s;
                if p > lo && p < hi {
                    out.push(p);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// `Omega(t) = \int_0^t omega(s) ds`, additive over whole periods.
    pub fn omega_integral(&self, t: f64) -> f64 {
        let n = (t / self.period).floor();
        let r = (t - n * self.period).clamp(0.0, self.period);
        n * self.omega_in_period(self.period) + self.omega_in_period(r)
    }

    fn omega_in_period(&self, r: f64) -> f64 {
        let qm = self.charge / self.mass;
        match &self.profile {
            FieldProfile::Constant { b0 } => qm * b0 * r,
            FieldProfile::Pulsed { b0, t0 } => qm * b0 * r.min(*t0),
            _ => {
                let breaks = self.breakpoints();
                quad::integrate_pieces(|s| self.omega(s), 0.0, r, &breaks, Tolerance::default())
                    .map(|q| q.value)
                    .expect("smooth periodic integrand")
            }
        }
    }

    /// True when the fundamental solutions have a closed piecewise form.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self.profile,
            FieldProfile::Constant { .. } | FieldProfile::Pulsed { .. }
        )
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidField(format!("{name} must be finite")))
    }
}

fn validate_samples(
    period: f64,
    times: &[f64],
    values: &[f64],
    interpolation: Interpolation,
) -> Result<()> {
    let min_len = match interpolation {
        Interpolation::Linear => 2,
        Interpolation::Cubic => 4,
    };
    if times.len() != values.len() {
        return Err(Error::InvalidField(format!(
            "times has {} entries but values has {}",
            times.len(),
            values.len()
        )));
    }
    if times.len() < min_len {
        return Err(Error::InvalidField(format!(
            "sampled profile needs at least {min_len} samples"
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidField("samples must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidField("sample times must be strictly increasing".into()));
    }
    let seam = 1e-12 * period;
    if times[0].abs() > seam || (times[times.len() - 1] - period).abs() > seam {
        return Err(Error::InvalidField(format!(
            "sample times must span [0, {period}]"
        )));
    }
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if (values[0] - values[values.len() - 1]).abs() > 1e-12 * scale {
        return Err(Error::InvalidField(
            "first and last sample values must match (periodicity)".into(),
        ));
    }
    Ok(())
}

/// Second derivatives of the periodic cubic spline through `(times, values)`.
fn periodic_spline(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len() - 1;
    let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let slope = |i: usize| (values[i + 1] - values[i]) / h[i];
    // row i: h[i-1] M[i-1] + 2 (h[i-1] + h[i]) M[i] + h[i] M[i+1] = 6 (s[i] - s[i-1])
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let im = (i + n - 1) % n;
        sub[i] = h[im];
        diag[i] = 2.0 * (h[im] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * (slope(i) - slope(im));
    }
    solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)
}

/// Sherman–Morrison reduction of a cyclic tridiagonal system.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1]; // A[n-1][0]
    let beta = sub[0]; // A[0][n-1]
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &d, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Which factor of `V = rho1 * rho2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Rho1,
    Rho2,
}

/// Result of an `L^p` norm request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpNorm {
    Finite(f64),
    Divergent,
}

impl LpNorm {
    pub fn is_finite(&self) -> bool {
        matches!(self, LpNorm::Finite(_))
    }
    pub fn value(&self) -> Option<f64> {
        match self {
            LpNorm::Finite(v) => Some(*v),
            LpNorm::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    v0: f64,
    rho: f64,
}

/// Radial power-law potential `v0 (1 + |x|^2)^(-rho/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct PotentialSpec {
    v0: f64,
    rho: f64,
}

impl TryFrom<RawPotential> for PotentialSpec {
    type Error = Error;
    fn try_from(raw: RawPotential) -> Result<Self> {
        PotentialSpec::new(raw.v0, raw.rho)
    }
}

impl From<PotentialSpec> for RawPotential {
    fn from(p: PotentialSpec) -> Self {
        RawPotential { v0: p.v0, rho: p.rho }
    }
}

impl PotentialSpec {
    pub fn new(v0: f64, rho: f64) -> Result<Self> {
        if !v0.is_finite() {
            return Err(Error::InvalidPotential(format!("v0 must be finite, got {v0}")));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidPotential(format!("rho must be > 0, got {rho}")));
        }
        Ok(PotentialSpec { v0, rho })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same decay, different amplitude.
    pub fn with_amplitude(&self, v0: f64) -> Self {
        PotentialSpec { v0, rho: self.rho }
    }

    pub fn radial(&self, r: f64) -> f64 {
        self.v0 * (1.0 + r * r).powf(-0.5 * self.rho)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.radial(x[0].hypot(x[1]))
    }

    pub fn rho1(&self, r: f64) -> f64 {
        self.radial(r).abs().sqrt()
    }

    pub fn rho2(&self, r: f64) -> f64 {
        let v = self.radial(r);
        v.signum() * v.abs().sqrt()
    }

    pub fn factor(&self, which: Factor, r: f64) -> f64 {
        match which {
            Factor::Rho1 => self.rho1(r),
            Factor::Rho2 => self.rho2(r),
        }
    }

    /// `|V|^k` as a radial profile `c (1 + r^2)^(-a)`: returns `(c, a)`.
    pub fn abs_power(&self, k: f64) -> RadialPowerLaw {
        RadialPowerLaw {
            amplitude: self.v0.abs().powf(k),
            exponent: 0.5 * k * self.rho,
        }
    }

    /// `||rho_j||_p` by radial quadrature; divergent when `p rho <= 4`.
    pub fn lp_norm(&self, which: Factor, p: f64) -> Result<LpNorm> {
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("exponent p must be >= 1, got {p}")));
        }
        // |rho1| = |rho2| pointwise, so both factors share the norm
        let _ = which;
        if self.v0 == 0.0 {
            return Ok(LpNorm::Finite(0.0));
        }
        let a = p * self.rho / 4.0;
        if a <= 1.0 {
            return Ok(LpNorm::Divergent);
        }
        let amp = self.v0.abs().powf(0.5 * p);
        // quadrature on the core, closed-form algebraic tail beyond r0
        let r0 = 16.0;
        let core = quad::integrate(|r| r * (1.0 + r * r).powf(-a), 0.0, r0, Tolerance::default())?;
        let tail = (1.0 + r0 * r0).powf(1.0 - a) / (2.0 * (a - 1.0));
        let integral = core.value + tail;
        Ok(LpNorm::Finite((2.0 * PI * amp * integral).powf(1.0 / p)))
    }
}

/// Radial weight `amplitude * (1 + r^2)^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPowerLaw {
    pub amplitude: f64,
    pub exponent: f64,
}

impl RadialPowerLaw {
    pub fn at(&self, r: f64) -> f64 {
        self.amplitude * (1.0 + r * r).powf(-self.exponent)
    }

    /// `\int_{|x| < r0} w(|x|) d^2x` in closed form.
    pub fn disk_integral(&self, r0: f64) -> f64 {
        let u = r0 * r0;
        let a = self.exponent;
        let radial = if (a - 1.0).abs() < 1e-12 {
            (1.0 + u).ln()
        } else {
            ((1.0 + u).powf(1.0 - a) - 1.0) / (1.0 - a)
        };
        PI * self.amplitude * radial
    }
}
