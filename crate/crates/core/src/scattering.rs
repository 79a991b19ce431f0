//! Time-integrated scattering quantities built on the free propagator.
//!
//! For a radial potential the angular-momentum factor `exp(i Omega(t) L / 2)`
//! commutes with `V`, so `U(t,0)* U0(t,0) = U~(t,0)* U~0(t,0)` with both
//! propagators taken in the rotating frame. Every quantity below is a norm,
//! hence also unaffected by that factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hill::{classify, extension_coefficients, FundamentalPair, StabilityClass, TAU_D};
use crate::models::{Factor, LpNorm, PotentialSpec};
use crate::quad::{self, Tolerance};
use crate::quantum::grid::GridSpec;
use crate::mat2::{self, Mat2};
use crate::quantum::metaplectic::{chirp_matrix, dilation_matrix, iwasawa, unimodular, ScaledWave, Spectral};
use crate::quantum::propagate::{gamma, interval_matrix, propagate_scaled, split_steps, PropagationOptions};
use crate::quantum::wave::{ordered_sum, WaveFunction};

pub const DEFAULT_SLICES: usize = 8;
pub const COOK_SLICES: usize = 16;
/// Latest period reachable by `wave_operator_defect`.
pub const MAX_WAVEOP_PERIOD: i64 = 6;

/// Midpoint slice family `phi(t_i)`, `t_i = (i + 1/2) T / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetVector {
    period: f64,
    slices: Vec<WaveFunction>,
}

impl FloquetVector {
    pub fn new(period: f64, slices: Vec<WaveFunction>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidArgument("a Floquet vector needs at least one slice".into()))?;
        if slices.iter().any(|s| s.grid() != first.grid()) {
            return Err(Error::InvalidArgument("all slices must share one grid".into()));
        }
        Ok(FloquetVector { period, slices })
    }

    /// Samples `f` at the slice midpoints.
    pub fn from_fn(period: f64, m: usize, f: impl Fn(f64) -> WaveFunction) -> Result<Self> {
        let slices = (0..m).map(|i| f((i as f64 + 0.5) * period / m as f64)).collect();
        Self::new(period, slices)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn slices(&self) -> &[WaveFunction] {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn grid(&self) -> GridSpec {
        self.slices[0].grid()
    }

    pub fn slice_times(&self) -> Vec<f64> {
        let m = self.len() as f64;
        (0..self.len()).map(|i| (i as f64 + 0.5) * self.period / m).collect()
    }

    /// `((T/M) sum_i ||phi_i||^2)^(1/2)`.
    pub fn k_norm(&self) -> f64 {
        let h = self.period / self.len() as f64;
        (h * self.slices.iter().map(|s| s.l2_norm().powi(2)).sum::<f64>()).sqrt()
    }
}

fn require_hyperbolic(pair: &FundamentalPair) -> Result<StabilityClass> {
    let class = classify(&pair.monodromy(), TAU_D);
    match class.floquet_exponent {
        Some(l) if l > 0.0 => Ok(class),
        _ => Err(Error::NotHyperbolic {
            discriminant: class.discriminant,
        }),
    }
}

fn require_singular_exponent(p: f64) -> Result<f64> {
    if !(p > 4.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 4")));
    }
    Ok(4.0 / p)
}

/// `(c1, c2)` with `zeta2(t + NT) = c1 zeta1(t) + c2 zeta2(t)`.
fn shifted_zeta2(pair: &FundamentalPair, n: i64) -> Result<[f64; 2]> {
    let a = extension_coefficients(&pair.monodromy(), n)?.a;
    Ok([a[1][0], a[1][1]])
}

/// `int_0^T |zeta2(t + NT)|^(-4/p) dt` with singular windows of half-width `1e-4 T`.
pub fn zeta2_singular_integral(pair: &FundamentalPair, n: i64, p: f64) -> Result<f64> {
    zeta2_singular_integral_with(pair, n, p, 1e-4 * pair.period())
}

/// As [`zeta2_singular_integral`] with an explicit window half-width.
///
/// Inside a window around a simple zero `t0` the integrand is replaced by
/// `|zeta2'(t0) (t - t0)|^(-4/p)`, integrated in closed form; windows are
/// clipped to `[0, T]` and narrowed when zeros crowd together.
pub fn zeta2_singular_integral_with(pair: &FundamentalPair, n: i64, p: f64, half_width: f64) -> Result<f64> {
    let alpha = require_singular_exponent(p)?;
    if !(half_width > 0.0) {
        return Err(Error::InvalidArgument("window half-width must be positive".into()));
    }
    let period = pair.period();
    let c = shifted_zeta2(pair, n)?;

    // zeros in the neighbouring periods can reach into [0, T] through their windows
    let mut zeros: Vec<(f64, f64)> = Vec::new();
    for shift in [-1i64, 0, 1] {
        let cs = shifted_zeta2(pair, n + shift)?;
        let (z, d) = pair.zeros_of_combination(cs)?;
        zeros.extend(z.into_iter().zip(d).map(|(t, d)| (t + shift as f64 * period, d)));
    }
    zeros.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_gap = zeros
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(f64::INFINITY, f64::min);
    let w = half_width.min(0.25 * min_gap);
    zeros.retain(|(t, _)| t + w > 0.0 && t - w < period);

    let local = |u: f64| u.signum() * u.abs().powf(1.0 - alpha) / (1.0 - alpha);
    let mut total = 0.0;
    let mut cursor = 0.0;
    let mut gaps = Vec::new();
    for &(t0, d) in &zeros {
        let lo = (t0 - w).max(0.0);
        let hi = (t0 + w).min(period);
        total += d.abs().powf(-alpha) * (local(hi - t0) - local(lo - t0));
        if lo > cursor {
            gaps.push((cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    if cursor < period {
        gaps.push((cursor, period));
    }

    let f = |t: f64| {
        let phi = pair.phi_in_period(t);
        (c[0] * phi[0][0] + c[1] * phi[0][1]).abs().powf(-alpha)
    };
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-11,
        max_intervals: 4000,
    };
    let breaks = pair.field().breakpoints();
    for (a, b) in gaps {
        total += quad::integrate_pieces(f, a, b, &breaks, tol)?.value;
    }
    Ok(total)
}

/// Least-squares decay of `log I_N` against `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n_values: Vec<i64>,
    pub i_values: Vec<f64>,
    /// Decay rate per period, `-d log I_N / dN`.
    pub fitted_rate: f64,
    /// `4 lambda / p`.
    pub predicted_rate: f64,
    pub rel_deviation: f64,
}

pub fn decay_fit(pair: &FundamentalPair, p: f64, n_values: &[i64]) -> Result<DecayReport> {
    let class = require_hyperbolic(pair)?;
    require_singular_exponent(p)?;
    if n_values.len() < 6 {
        return Err(Error::InsufficientData {
            needed: 6,
            got: n_values.len(),
        });
    }
    let i_values = n_values
        .par_iter()
        .map(|&n| zeta2_singular_integral(pair, n, p))
        .collect::<Result<Vec<f64>>>()?;
    let ns: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    let logs: Vec<f64> = i_values.iter().map(|v| v.ln()).collect();
    let (_, slope) = crate::classical::linear_fit(&ns, &logs);
    let fitted_rate = -slope;
    let predicted_rate = 4.0 * class.floquet_exponent.unwrap_or(0.0) / p;
    Ok(DecayReport {
        n_values: n_values.to_vec(),
        i_values,
        fitted_rate,
        predicted_rate,
        rel_deviation: (fitted_rate - predicted_rate).abs() / predicted_rate,
    })
}

/// `S_K = sum_{N=0..K} I_N^(1/2)` for `K = 0..=n_max`.
pub fn resolvent_series_partial_sums(pair: &FundamentalPair, p: f64, n_max: i64) -> Result<Vec<f64>> {
    require_hyperbolic(pair)?;
    require_singular_exponent(p)?;
    if n_max < 0 {
        return Err(Error::InvalidArgument("n_max must be non-negative".into()));
    }
    let terms = (0..=n_max)
        .into_par_iter()
        .map(|n| zeta2_singular_integral(pair, n, p).map(f64::sqrt))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect())
}

/// A `(tau, s)` pair dropped because it sits too close to a caustic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcludedPair {
    pub tau: f64,
    pub s: f64,
    /// `Gamma / m` at the pair.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetNormRow {
    pub t: f64,
    pub n: i64,
    /// Midpoint value of `int_0^T ||rho1 U~0(t + NT, s) rho2 phi(s)||_2 ds`.
    pub value: f64,
    /// Same sum with each term replaced by `Gamma^(-2/p) ||rho1||_p ||rho2||_p ||phi(s)||_2`.
    pub unit_bound: f64,
    /// Largest termwise ratio, the constant the bound needs on this row.
    pub max_term_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetNormTable {
    pub rows: Vec<FloquetNormRow>,
    pub excluded: Vec<ExcludedPair>,
}

fn finite_norm(pot: &PotentialSpec, which: Factor, p: f64) -> Result<f64> {
    match pot.lp_norm(which, p)? {
        LpNorm::Finite(v) => Ok(v),
        LpNorm::Divergent => Err(Error::DivergentWeight { p }),
    }
}

/// `||rho1 psi||_2` for a comoving state.
fn weighted_norm(wave: &ScaledWave, pot: &PotentialSpec) -> f64 {
    if pot.v0() == 0.0 {
        return 0.0;
    }
    wave.weighted_l2_sq(&pot.abs_power(1.0)).sqrt()
}

pub fn floquet_free_norm(
    pair: &FundamentalPair,
    n: i64,
    pot: &PotentialSpec,
    phi: &FloquetVector,
    p: f64,
    opts: &PropagationOptions,
) -> Result<FloquetNormTable> {
    require_hyperbolic(pair)?;
    let scale = finite_norm(pot, Factor::Rho1, p)? * finite_norm(pot, Factor::Rho2, p)?;
    let period = pair.period();
    let times = phi.slice_times();
    let h = period / phi.len() as f64;
    let m = pair.field().mass();
    let sp = Spectral::new(phi.grid());
    let weighted: Vec<WaveFunction> = phi.slices().iter().map(|s| s.multiply_radial(|r| pot.rho2(r))).collect();
    let norms: Vec<f64> = phi.slices().iter().map(WaveFunction::l2_norm).collect();

    let pairs: Vec<(usize, usize)> = (0..times.len())
        .flat_map(|i| (0..times.len()).map(move |j| (i, j)))
        .collect();
    // Ok(None) marks an excluded pair
    let terms = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<(f64, f64, Option<ExcludedPair>)> {
            let tau = times[i] + n as f64 * period;
            let s = times[j];
            let g = gamma(pair, tau, s)?;
            if g / m < opts.gamma_min {
                return Ok((0.0, 0.0, Some(ExcludedPair { tau, s, gamma: g / m })));
            }
            let unit = g.powf(-2.0 / p) * scale * norms[j];
            if norms[j] == 0.0 {
                return Ok((0.0, unit, None));
            }
            let mut wave = ScaledWave::new(weighted[j].clone());
            propagate_scaled(pair, tau, s, &mut wave, &sp)?;
            Ok((weighted_norm(&wave, pot), unit, None))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(times.len());
    let mut excluded = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let mut value = 0.0;
        let mut unit_bound = 0.0;
        let mut max_term_ratio: f64 = 0.0;
        for j in 0..times.len() {
            let (v, u, ex) = terms[i * times.len() + j];
            if let Some(ex) = ex {
                excluded.push(ex);
                continue;
            }
            value += h * v;
            unit_bound += h * u;
            if u > 0.0 {
                max_term_ratio = max_term_ratio.max(v / u);
            }
        }
        rows.push(FloquetNormRow {
            t,
            n,
            value,
            unit_bound,
            max_term_ratio,
        });
    }
    Ok(FloquetNormTable { rows, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaR {
    /// Right ends of the quadrature cells.
    pub r_values: Vec<f64>,
    /// Running value of the integral at each `r_values` entry.
    pub sigma_values: Vec<f64>,
}

impl SigmaR {
    pub fn value(&self) -> f64 {
        self.sigma_values.last().copied().unwrap_or(0.0)
    }

    /// `|Sigma(R) - Sigma(3R/4)| / |Sigma(R)|`, read off the running values.
    pub fn last_quarter_change(&self) -> f64 {
        let total = self.value();
        let r = self.r_values.last().copied().unwrap_or(0.0);
        let k = self.r_values.partition_point(|&x| x < 0.75 * r - 1e-12);
        let at = if k == 0 { 0.0 } else { self.sigma_values[k.min(self.sigma_values.len()) - 1] };
        if total == 0.0 {
            0.0
        } else {
            ((total - at) / total).abs()
        }
    }
}

/// Composite midpoint rule for `int_0^R sigma e^(tau_im sigma) ||rho1 U~0(sigma, 0) rho2 phi||_2 dsigma`.
///
/// `lambda_spec` enters the integrand only through a unimodular phase and is
/// accepted for interface completeness.
#[allow(clippy::too_many_arguments)]
pub fn sigma_r_quadrature(
    pair: &FundamentalPair,
    pot: &PotentialSpec,
    phi: &WaveFunction,
    lambda_spec: f64,
    tau_im: f64,
    r: f64,
    dsigma: f64,
    p: f64,
) -> Result<SigmaR> {
    let _ = lambda_spec;
    let class = require_hyperbolic(pair)?;
    let period = pair.period();
    let lambda = class.floquet_exponent.unwrap_or(0.0);
    let bound = 2.0 * lambda / (p * period);
    if tau_im.abs() >= bound {
        return Err(Error::EpsilonTooLarge { tau: tau_im, bound });
    }
    if !(dsigma > 0.0 && dsigma <= period / 8.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("dsigma = {dsigma} must lie in (0, T/8]")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("R = {r} must be positive")));
    }
    let k = (r / dsigma - 1e-9).ceil().max(1.0) as usize;
    let h = r / k as f64;
    let sp = Spectral::new(phi.grid());
    let start = phi.multiply_radial(|x| pot.rho2(x));
    let zero = phi.l2_norm() == 0.0 || pot.v0() == 0.0;
    let integrand = (0..k)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let sigma = (i as f64 + 0.5) * h;
            if zero {
                return Ok(0.0);
            }
            let mut wave = ScaledWave::new(start.clone());
            propagate_scaled(pair, sigma, 0.0, &mut wave, &sp)?;
            Ok(sigma * (tau_im * sigma).exp() * weighted_norm(&wave, pot))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = 0.0;
    let mut r_values = Vec::with_capacity(k);
    let mut sigma_values = Vec::with_capacity(k);
    for (i, v) in integrand.iter().enumerate() {
        acc += h * v;
        r_values.push((i + 1) as f64 * h);
        sigma_values.push(acc);
    }
    Ok(SigmaR { r_values, sigma_values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CookSeries {
    /// `C_1..C_{N_max}`.
    pub partial_sums: Vec<f64>,
    /// `C_N - C_{N-1}`, with `C_0 = 0`.
    pub increments: Vec<f64>,
    pub excluded: Vec<ExcludedPair>,
}

impl CookSeries {
    /// Successive increment ratios `inc_{N+1} / inc_N`, first entry for `N = 1`.
    pub fn ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// `C_K = sum_{N=1..K} int_0^T ||rho1 U~0(t + NT, 0) psi0||_2 dt` with
/// [`COOK_SLICES`] midpoint slices per period.
pub fn cook_integrand_partial_sums(
    pair: &FundamentalPair,
    pot: &PotentialSpec,
    psi0: &WaveFunction,
    n_max: i64,
    p: f64,
    opts: &PropagationOptions,
) -> Result<CookSeries> {
    require_hyperbolic(pair)?;
    finite_norm(pot, Factor::Rho1, p)?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let period = pair.period();
    let m = pair.field().mass();
    let h = period / COOK_SLICES as f64;
    let sp = Spectral::new(psi0.grid());
    let zero = psi0.l2_norm() == 0.0 || pot.v0() == 0.0;
    let jobs: Vec<(i64, usize)> = (1..=n_max)
        .flat_map(|n| (0..COOK_SLICES).map(move |k| (n, k)))
        .collect();
    let terms = jobs
        .par_iter()
        .map(|&(n, k)| -> Result<(f64, Option<ExcludedPair>)> {
            let tau = (k as f64 + 0.5) * h + n as f64 * period;
            let g = gamma(pair, tau, 0.0)? / m;
            if g < opts.gamma_min {
                return Ok((0.0, Some(ExcludedPair { tau, s: 0.0, gamma: g })));
            }
            if zero {
                return Ok((0.0, None));
            }
            let mut wave = ScaledWave::new(psi0.clone());
            propagate_scaled(pair, tau, 0.0, &mut wave, &sp)?;
            Ok((weighted_norm(&wave, pot), None))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut increments = Vec::with_capacity(n_max as usize);
    let mut excluded = Vec::new();
    for chunk in terms.chunks(COOK_SLICES) {
        let mut inc = 0.0;
        for (v, ex) in chunk {
            match ex {
                Some(e) => excluded.push(*e),
                None => inc += h * v,
            }
        }
        increments.push(inc);
    }
    let partial_sums = increments
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(CookSeries {
        partial_sums,
        increments,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOpOptions {
    /// Grid carrying the comoving difference state; `None` uses the grid of `psi0`.
    pub work_grid: Option<GridSpec>,
    /// Multiplies the initial frame scale chosen by the margin search.
    pub frame_scale: f64,
    /// Largest fraction of `||psi0||^2` allowed in the outer tenth of the work grid.
    pub edge_tol: f64,
}

impl Default for WaveOpOptions {
    fn default() -> Self {
        WaveOpOptions {
            work_grid: None,
            frame_scale: 1.0,
            edge_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveOpReport {
    pub n1: i64,
    pub n2: i64,
    /// `||W_{N2} psi0 - W_{N1} psi0||_2`.
    pub defect: f64,
    /// Mass of the difference state in the outer frame, relative to `||psi0||^2`.
    pub edge_fraction: f64,
    pub steps: usize,
    pub frame_start: f64,
    pub frame_end: f64,
}

/// `||W_{N2} - W_{N1}||` applied to `psi0`, with `W_N = U~(NT,0)* U~0(NT,0)`.
///
/// Unitarity reduces the defect to `||U~(N2T,N1T) phi - U~0(N2T,N1T) phi||`
/// for `phi = U~0(N1T,0) psi0`. The difference `delta` solves
/// `i delta' = (H~0 + V) delta + V psi_free` from `delta = 0` and is advanced
/// by the splitting
///
/// `delta <- U~0(h/2) [ e^{-ihV} U~0(h/2) delta + (e^{-ihV} - 1) psi_free(t + h/2) ]`,
///
/// where `U~0` is applied exactly in a frame that follows the free flow, and
/// `psi_free` is carried in its own exact comoving form. Only the
/// potential-generated part is ever sampled on a grid.
pub fn wave_operator_defect(
    pair: &FundamentalPair,
    pot: &PotentialSpec,
    psi0: &WaveFunction,
    n1: i64,
    n2: i64,
    dt: f64,
    opts: &WaveOpOptions,
) -> Result<WaveOpReport> {
    if !(0 <= n1 && n1 < n2 && n2 <= MAX_WAVEOP_PERIOD) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= N1 < N2 <= {MAX_WAVEOP_PERIOD}, got ({n1}, {n2})"
        )));
    }
    let period = pair.period();
    let (t1, t2) = (n1 as f64 * period, n2 as f64 * period);
    if !(dt > 0.0 && dt <= (t2 - t1) / 256.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} must lie in (0, (N2 - N1) T / 256]"
        )));
    }
    let grid = opts.work_grid.unwrap_or(psi0.grid());
    let sp_free = Spectral::new(psi0.grid());
    let sp = Spectral::new(grid);

    let mut free = ScaledWave::new(psi0.clone());
    propagate_scaled(pair, t1, 0.0, &mut free, &sp_free)?;

    let steps = split_steps(pair.field(), t1, t2, dt);
    // consecutive half steps merge: both states jump from kick point to kick point
    let mut jumps = Vec::with_capacity(steps.len() + 1);
    let mut prev = t1;
    for &(t_mid, _) in &steps {
        jumps.push(interval_matrix(pair, t_mid, prev)?);
        prev = t_mid;
    }
    jumps.push(interval_matrix(pair, t2, prev)?);

    let sigma0 = opts.frame_scale * best_frame(&jumps, (free.kappa, free.sigma), grid);
    let mut delta = ScaledWave {
        kappa: free.kappa,
        sigma: sigma0,
        base: WaveFunction::zeros(grid),
    };
    if pot.v0() != 0.0 {
        for (&(_, h), m) in steps.iter().zip(&jumps) {
            delta.evolve(m, &sp);
            free.evolve(m, &sp_free);
            let (src, _) = free.reframe(delta.kappa, delta.sigma, grid, &sp);
            kick(&mut delta, &src, pot, h, &sp);
        }
        delta.evolve(&jumps[steps.len()], &sp);
    }

    let norm0 = psi0.l2_norm().powi(2);
    let band = band_mass(&delta.base);
    let edge_fraction = if norm0 > 0.0 { band / norm0 } else { 0.0 };
    if edge_fraction > opts.edge_tol {
        return Err(Error::GridEscape {
            fraction: edge_fraction,
        });
    }
    Ok(WaveOpReport {
        n1,
        n2,
        defect: delta.l2_norm(),
        edge_fraction,
        steps: steps.len(),
        frame_start: sigma0,
        frame_end: delta.sigma,
    })
}

/// `(kappa, sigma)` of `M Chirp(kappa) Dil(sigma)` after removing the rotation.
fn advance(frame: (f64, f64), m: &Mat2) -> (f64, f64) {
    let total = unimodular(&mat2::mul(m, &mat2::mul(&chirp_matrix(frame.0), &dilation_matrix(frame.1))));
    let iw = iwasawa(&total);
    (iw.chirp, iw.sigma)
}

/// Initial dilation of the difference frame.
///
/// A unit phase-space cell at the origin, carried by the frame, must stay
/// inside the grid (`|x| / sigma <= L`) and resolved against the free wave's
/// local momentum (`sigma (1 + |kappa_free - kappa|) <= k_max`) at every kick.
/// The scale maximising the worse of the two margins over the run is returned.
fn best_frame(jumps: &[Mat2], free0: (f64, f64), grid: GridSpec) -> f64 {
    let (l, k_max) = (grid.half_extent(), grid.k_max());
    let margin = |sigma0: f64| {
        let mut frame = (free0.0, sigma0);
        let mut free = free0;
        let mut worst = f64::INFINITY;
        for m in jumps {
            frame = advance(frame, m);
            free = advance(free, m);
            let coverage = frame.1 * l;
            let resolution = k_max / (frame.1 * (1.0 + (free.0 - frame.0).abs()));
            worst = worst.min(coverage.min(resolution));
        }
        worst
    };
    (0..=160)
        .map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 160.0))
        .map(|s| (s, margin(s)))
        .fold((1.0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
        .0
}

/// `g <- e^{-ihV} g + (e^{-ihV} - 1) src`, with `V` read at `sigma |y|`.
fn kick(delta: &mut ScaledWave, src: &WaveFunction, pot: &PotentialSpec, h: f64, sp: &Spectral) {
    let sigma = delta.sigma;
    delta
        .base
        .data_mut()
        .par_iter_mut()
        .zip(src.data().par_iter())
        .zip(sp.r2().par_iter())
        .for_each(|((g, s), r2)| {
            let e = Complex64::from_polar(1.0, -h * pot.radial(sigma * r2.sqrt()));
            *g = e * *g + (e - 1.0) * s;
        });
}

fn band_mass(psi: &WaveFunction) -> f64 {
    let grid = psi.grid();
    let n = grid.n();
    let cells: Vec<Complex64> = psi
        .data()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            if grid.in_outer_frame(idx / n, idx % n) {
                Complex64::new(z.norm_sqr(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ordered_sum(&cells, |z| z.re) * grid.cell_area()
}
