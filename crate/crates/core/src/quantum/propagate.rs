//! Two-time propagators of the rotating-frame Hamiltonian
//! `p^2/(2m) + q^2 B(t)^2 |x|^2 / (8m) (+ V)`.
//!
//! The lab-frame evolution differs by `exp(i Omega(t) L / 2)`, a rotation
//! that leaves every radial weight, `L^p` norm and `|x|` moment unchanged.

use num_complex::Complex64;

use super::grid::GridSpec;
use super::metaplectic::{unimodular, ScaledWave, Spectral};
use super::wave::WaveFunction;
use crate::error::{Error, Result};
use crate::hill::FundamentalPair;
use crate::mat2::{self, Mat2};
use crate::models::{Factor, FieldSpec, LpNorm, PotentialSpec};

/// Thresholds shared by the grid propagators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Minimum `Gamma / m` accepted by kernel-type propagation.
    pub gamma_min: f64,
    /// Largest fraction of `||psi||^2` allowed to leave the output grid.
    pub escape_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            gamma_min: 1e-3,
            escape_tol: 1e-6,
        }
    }
}

/// Phase-space matrix of `U(tau, s)` acting on `(x, p)`.
pub fn interval_matrix(pair: &FundamentalPair, tau: f64, s: f64) -> Result<Mat2> {
    let m = pair.field().mass();
    let phi = mat2::mul(&pair.phi(tau)?, &mat2::adjugate(&pair.phi(s)?));
    Ok(unimodular(&[
        [phi[0][0], phi[0][1] / m],
        [m * phi[1][0], phi[1][1]],
    ]))
}

/// Signed `zeta1(s) zeta2(tau) - zeta1(tau) zeta2(s)`.
pub fn gamma_signed(pair: &FundamentalPair, tau: f64, s: f64) -> Result<f64> {
    let a = pair.phi(tau)?;
    let b = pair.phi(s)?;
    Ok(b[0][0] * a[0][1] - a[0][0] * b[0][1])
}

/// `Gamma(tau, s) = |zeta1(s) zeta2(tau) - zeta1(tau) zeta2(s)|`.
pub fn gamma(pair: &FundamentalPair, tau: f64, s: f64) -> Result<f64> {
    gamma_signed(pair, tau, s).map(f64::abs)
}

fn check_caustic(pair: &FundamentalPair, tau: f64, s: f64, opts: &PropagationOptions) -> Result<f64> {
    let g = gamma(pair, tau, s)?;
    let rel = g / pair.field().mass();
    if rel < opts.gamma_min {
        return Err(Error::CausticProximity {
            gamma: rel,
            threshold: opts.gamma_min,
        });
    }
    Ok(g)
}

/// Exact free evolution of a comoving state from `s` to `tau`.
pub fn propagate_scaled(pair: &FundamentalPair, tau: f64, s: f64, wave: &mut ScaledWave, sp: &Spectral) -> Result<()> {
    let m = interval_matrix(pair, tau, s)?;
    wave.evolve(&m, sp);
    Ok(())
}

/// `U~0(tau, s) psi` on the grid of `psi`.
///
/// Realises the quadratic-phase kernel
/// `m / (2 pi i beta) exp(i m (delta |x|^2 - 2 x.y + alpha |y|^2) / (2 beta))`
/// through its chirp–dilation–rotation factorisation, then samples the
/// result back onto the input grid.
pub fn mehler_propagate(
    pair: &FundamentalPair,
    tau: f64,
    s: f64,
    psi: &WaveFunction,
    opts: &PropagationOptions,
) -> Result<WaveFunction> {
    if tau == s {
        return Ok(psi.clone());
    }
    check_caustic(pair, tau, s, opts)?;
    let sp = Spectral::new(psi.grid());
    let mut wave = ScaledWave::new(psi.clone());
    propagate_scaled(pair, tau, s, &mut wave, &sp)?;
    wave.materialize(psi.grid(), &sp, opts.escape_tol)
}

/// Second-order splitting: half kinetic step, full multiplicative step
/// `exp(-i h (q^2 B(t_mid)^2 |x|^2 / (8m) + V))`, half kinetic step.
/// Steps never straddle a field breakpoint; `t1 < t0` runs backwards.
pub fn strang_oracle(
    field: &FieldSpec,
    potential: Option<&PotentialSpec>,
    t0: f64,
    t1: f64,
    dt: f64,
    psi: &WaveFunction,
) -> Result<WaveFunction> {
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(psi.clone());
    }
    if !(dt > 0.0 && dt <= span / 256.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} must lie in (0, |t1 - t0| / 256]"
        )));
    }
    let sp = Spectral::new(psi.grid());
    let mut out = psi.clone();
    let steps = split_steps(field, t0, t1, dt);
    let m = field.mass();
    let q2 = field.charge() * field.charge();
    let mut pending = 0.5 * steps[0].1;
    for (k, &(t_mid, h)) in steps.iter().enumerate() {
        let data = out.data_mut();
        sp.fft().forward(data);
        sp.kinetic_in_fourier(data, pending / m);
        sp.fft().inverse(data);
        let b = field.evaluate(t_mid);
        let osc = q2 * b * b / (8.0 * m);
        match potential {
            Some(v) => sp.phase_radial(data, |r| h * (osc * r * r + v.radial(r))),
            None => sp.phase_radial(data, |r| h * osc * r * r),
        }
        pending = 0.5 * h + steps.get(k + 1).map_or(0.0, |s| 0.5 * s.1);
    }
    let data = out.data_mut();
    sp.fft().forward(data);
    sp.kinetic_in_fourier(data, pending / m);
    sp.fft().inverse(data);
    Ok(out)
}

/// `(t_mid, h)` for every step from `t0` to `t1`, signed `h`.
pub fn split_steps(field: &FieldSpec, t0: f64, t1: f64, dt: f64) -> Vec<(f64, f64)> {
    let mut knots = vec![t0];
    let mut inner = field.breakpoints_between(t0, t1);
    if t1 < t0 {
        inner.reverse();
    }
    knots.extend(inner);
    knots.push(t1);
    let mut steps = Vec::new();
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        let k = (len.abs() / dt - 1e-9).ceil().max(1.0) as usize;
        let h = len / k as f64;
        for i in 0..k {
            steps.push((w[0] + (i as f64 + 0.5) * h, h));
        }
    }
    steps
}

/// `||U~0(tau, s) psi||_inf * Gamma(tau, s) / ||psi||_1`.
pub fn dispersive_ratio(
    pair: &FundamentalPair,
    tau: f64,
    s: f64,
    psi: &WaveFunction,
    opts: &PropagationOptions,
) -> Result<f64> {
    let g = check_caustic(pair, tau, s, opts)?;
    let l1 = psi.l1_norm();
    if l1 == 0.0 {
        return Err(Error::InvalidArgument("psi must be nonzero".into()));
    }
    let sp = Spectral::new(psi.grid());
    let mut wave = ScaledWave::new(psi.clone());
    propagate_scaled(pair, tau, s, &mut wave, &sp)?;
    Ok(wave.sup_norm() * g / l1)
}

/// `||rho1 U~0(tau, s) (rho2 psi)||_2 Gamma^(2/p) / (||rho1||_p ||rho2||_p ||psi||_2)`.
pub fn weighted_norm_ratio(
    pair: &FundamentalPair,
    tau: f64,
    s: f64,
    psi: &WaveFunction,
    pot: &PotentialSpec,
    p_tilde: f64,
    opts: &PropagationOptions,
) -> Result<f64> {
    if !(p_tilde >= 2.0) {
        return Err(Error::InvalidArgument(format!("p~ = {p_tilde} must be >= 2")));
    }
    let n1 = match pot.lp_norm(Factor::Rho1, p_tilde)? {
        LpNorm::Finite(v) => v,
        LpNorm::Divergent => return Err(Error::DivergentWeight { p: p_tilde }),
    };
    let n2 = match pot.lp_norm(Factor::Rho2, p_tilde)? {
        LpNorm::Finite(v) => v,
        LpNorm::Divergent => return Err(Error::DivergentWeight { p: p_tilde }),
    };
    let norm = psi.l2_norm();
    if norm == 0.0 || pot.v0() == 0.0 {
        return Ok(0.0);
    }
    let g = check_caustic(pair, tau, s, opts)?;
    let sp = Spectral::new(psi.grid());
    let mut wave = ScaledWave::new(psi.multiply_radial(|r| pot.rho2(r)));
    propagate_scaled(pair, tau, s, &mut wave, &sp)?;
    let num = wave.weighted_l2_sq(&pot.abs_power(1.0)).sqrt();
    Ok(num * g.powf(2.0 / p_tilde) / (n1 * n2 * norm))
}

/// Rotating-frame state of `U~0(t, 0) psi0` in comoving form.
pub fn free_from_origin(pair: &FundamentalPair, t: f64, psi0: &WaveFunction, sp: &Spectral) -> Result<ScaledWave> {
    let mut wave = ScaledWave::new(psi0.clone());
    propagate_scaled(pair, t, 0.0, &mut wave, sp)?;
    Ok(wave)
}

/// `psi(x) -> psi(R x)` with `R` the rotation by `+alpha`: the pattern turns
/// by `-alpha`. Realised as three Fourier shears, so it is unitary on the grid.
pub fn rotate_grid(psi: &mut WaveFunction, alpha: f64) {
    if alpha == 0.0 {
        return;
    }
    let a = -(0.5 * alpha).tan();
    let b = alpha.sin();
    shear(psi, a, false);
    shear(psi, b, true);
    shear(psi, a, false);
}

/// Along-axis translation: `f(x1 + c x2, x2)` (or `f(x1, x2 + c x1)` when `second`).
fn shear(psi: &mut WaveFunction, c: f64, second: bool) {
    use rayon::prelude::*;
    let grid = psi.grid();
    let n = grid.n();
    let xs = grid.coords();
    let ks = grid.wavenumbers();
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let data = psi.data_mut();
    if !second {
        super::fft::transpose(data, n);
    }
    // rows now run along the axis to be translated; the row index is the other coordinate
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let shift = c * xs[i];
        fwd.process(row);
        for (z, k) in row.iter_mut().zip(&ks) {
            *z *= Complex64::from_polar(1.0 / n as f64, k * shift);
        }
        inv.process(row);
    });
    if !second {
        super::fft::transpose(data, n);
    }
}

/// Lab-frame splitting of `p^2/(2m) - (omega/2) L + q^2 B^2 |x|^2/(8m) + V`,
/// with the angular-momentum factor applied as a grid rotation each step.
pub fn lab_strang(
    field: &FieldSpec,
    potential: Option<&PotentialSpec>,
    t0: f64,
    t1: f64,
    dt: f64,
    psi: &WaveFunction,
) -> Result<WaveFunction> {
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(psi.clone());
    }
    let sp = Spectral::new(psi.grid());
    let mut out = psi.clone();
    let steps = split_steps(field, t0, t1, dt);
    let m = field.mass();
    let q2 = field.charge() * field.charge();
    for &(t_mid, h) in &steps {
        sp.free(out.data_mut(), 0.5 * h / m);
        let b = field.evaluate(t_mid);
        let osc = q2 * b * b / (8.0 * m);
        match potential {
            Some(v) => sp.phase_radial(out.data_mut(), |r| h * (osc * r * r + v.radial(r))),
            None => sp.phase_radial(out.data_mut(), |r| h * osc * r * r),
        }
        rotate_grid(&mut out, 0.5 * h * field.omega(t_mid));
        sp.free(out.data_mut(), 0.5 * h / m);
    }
    Ok(out)
}

/// Checks that `grid` can hold `psi` with negligible edge mass.
pub fn check_inside(psi: &WaveFunction, limit: f64) -> Result<()> {
    let f = psi.frame_fraction();
    if f > limit {
        return Err(Error::GridEscape { fraction: f });
    }
    Ok(())
}

/// Convenience: a unit Gaussian `pi^(-1/2) exp(-|x|^2/2)` on `grid`.
pub fn unit_gaussian(grid: GridSpec) -> WaveFunction {
    WaveFunction::gaussian(grid, [0.0, 0.0], [0.0, 0.0], 1.0)
}
