//! Exact quadratic propagation in a comoving frame.
//!
//! In two dimensions the operators
//!
//! * `Chirp(c)`: `psi -> exp(i c |x|^2 / 2) psi`, matrix `[[1, 0], [c, 1]]`,
//! * `Free(b)`: `exp(-i b |k|^2 / 2)` in Fourier space, matrix `[[1, b], [0, 1]]`,
//! * `Dil(s)`: `psi -> psi(x / s) / s`, matrix `[[s, 0], [0, 1/s]]`,
//!
//! compose exactly like their Heisenberg matrices (the metaplectic sign
//! squares away across the two axes). Any symplectic `M` factors as
//! `Chirp(c) Dil(s) Rot(theta)` with `Rot(theta) = Chirp(-tan(theta/2))
//! Free(sin theta) Chirp(-tan(theta/2))`, so a state `Chirp(kappa) Dil(sigma) g`
//! stays in that form with `g` on a fixed grid and only ever rotated in
//! phase space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{Fft2, Resampler};
use super::grid::GridSpec;
use super::wave::{ordered_sum, WaveFunction};
use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};
use crate::models::RadialPowerLaw;
use crate::quad::{self, Tolerance};

/// Largest phase-space angle applied by one chirp–free–chirp piece.
const MAX_PIECE: f64 = PI / 8.0;

/// `M = Chirp(chirp) Dil(sigma) Rot(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iwasawa {
    pub chirp: f64,
    pub sigma: f64,
    pub theta: f64,
}

pub fn iwasawa(m: &Mat2) -> Iwasawa {
    let [[a, b], [c, d]] = *m;
    let s2 = a * a + b * b;
    Iwasawa {
        chirp: (a * c + b * d) / s2,
        sigma: s2.sqrt(),
        theta: b.atan2(a),
    }
}

pub fn chirp_matrix(c: f64) -> Mat2 {
    [[1.0, 0.0], [c, 1.0]]
}

pub fn dilation_matrix(s: f64) -> Mat2 {
    [[s, 0.0], [0.0, 1.0 / s]]
}

/// Rescales a nearly unimodular matrix to determinant one.
pub fn unimodular(m: &Mat2) -> Mat2 {
    let s = mat2::det(m).sqrt();
    [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]]
}

/// FFT plans and coordinate tables for one grid.
pub struct Spectral {
    grid: GridSpec,
    fft: Fft2,
    r2: Vec<f64>,
    k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let xs = grid.coords();
        let ks = grid.wavenumbers();
        let mut r2 = vec![0.0; grid.len()];
        let mut k2 = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                r2[i * n + j] = xs[i] * xs[i] + xs[j] * xs[j];
                k2[i * n + j] = ks[i] * ks[i] + ks[j] * ks[j];
            }
        }
        Spectral {
            grid,
            fft: Fft2::new(n),
            r2,
            k2,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }
    pub fn r2(&self) -> &[f64] {
        &self.r2
    }
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// `psi *= exp(i c |x|^2 / 2)`.
    pub fn chirp(&self, data: &mut [Complex64], c: f64) {
        if c == 0.0 {
            return;
        }
        data.par_iter_mut()
            .zip(self.r2.par_iter())
            .for_each(|(z, r2)| *z *= Complex64::from_polar(1.0, 0.5 * c * r2));
    }

    /// `psi *= exp(-i phase(|x|))` for a radial phase function.
    pub fn phase_radial(&self, data: &mut [Complex64], phase: impl Fn(f64) -> f64 + Sync) {
        data.par_iter_mut()
            .zip(self.r2.par_iter())
            .for_each(|(z, r2)| *z *= Complex64::from_polar(1.0, -phase(r2.sqrt())));
    }

    /// Multiplies the spectrum by `exp(-i b |k|^2 / 2)`, data in Fourier space.
    pub fn kinetic_in_fourier(&self, spec: &mut [Complex64], b: f64) {
        spec.par_iter_mut()
            .zip(self.k2.par_iter())
            .for_each(|(z, k2)| *z *= Complex64::from_polar(1.0, -0.5 * b * k2));
    }

    /// `Free(b)` in position space.
    pub fn free(&self, data: &mut [Complex64], b: f64) {
        if b == 0.0 {
            return;
        }
        self.fft.forward(data);
        self.kinetic_in_fourier(data, b);
        self.fft.inverse(data);
    }

    /// `Rot(theta)` as chirp–free–chirp pieces of at most `pi/8` each.
    pub fn rotate(&self, data: &mut [Complex64], theta: f64) {
        if theta == 0.0 {
            return;
        }
        let pieces = (theta.abs() / MAX_PIECE).ceil().max(1.0) as usize;
        let t = theta / pieces as f64;
        let c = -(0.5 * t).tan();
        let b = t.sin();
        self.chirp(data, c);
        for k in 0..pieces {
            self.free(data, b);
            self.chirp(data, if k + 1 == pieces { c } else { 2.0 * c });
        }
    }
}

/// `psi = Chirp(kappa) Dil(sigma) base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledWave {
    pub kappa: f64,
    pub sigma: f64,
    pub base: WaveFunction,
}

impl ScaledWave {
    pub fn new(base: WaveFunction) -> Self {
        ScaledWave {
            kappa: 0.0,
            sigma: 1.0,
            base,
        }
    }

    pub fn frame_matrix(&self) -> Mat2 {
        mat2::mul(&chirp_matrix(self.kappa), &dilation_matrix(self.sigma))
    }

    /// Applies the metaplectic operator with Heisenberg matrix `m`.
    pub fn evolve(&mut self, m: &Mat2, sp: &Spectral) {
        let total = unimodular(&mat2::mul(m, &self.frame_matrix()));
        let iw = iwasawa(&total);
        sp.rotate(self.base.data_mut(), iw.theta);
        self.kappa = iw.chirp;
        self.sigma = iw.sigma;
    }

    pub fn l2_norm(&self) -> f64 {
        self.base.l2_norm()
    }

    pub fn l1_norm(&self) -> f64 {
        self.sigma * self.base.l1_norm()
    }

    pub fn sup_norm(&self) -> f64 {
        self.base.sup_norm() / self.sigma
    }

    pub fn second_moment(&self) -> f64 {
        self.sigma * self.base.second_moment()
    }

    /// `\int w(|x|) |psi(x)|^2 dx` with cell-integrated weights, exact at the
    /// origin cell, so that weights much narrower than a cell stay accurate.
    pub fn weighted_l2_sq(&self, weight: &RadialPowerLaw) -> f64 {
        let w = cell_weights(self.base.grid(), weight, self.sigma);
        let terms: Vec<Complex64> = self
            .base
            .data()
            .iter()
            .zip(&w)
            .map(|(z, w)| Complex64::new(z.norm_sqr() * w, 0.0))
            .collect();
        ordered_sum(&terms, |z| z.re)
    }

    /// Re-expresses the state as `Chirp(kappa) Dil(sigma) g` with `g` sampled
    /// on `grid`. Returns `g` and the fraction of `||psi||^2` that fell outside.
    pub fn reframe(&self, kappa: f64, sigma: f64, grid: GridSpec, sp: &Spectral) -> (WaveFunction, f64) {
        let s = self.sigma / sigma;
        let src = self.base.grid();
        let r = Resampler::new(src.n(), src.half_extent(), grid.n(), -grid.half_extent() / s, grid.dx() / s);
        let mut out = WaveFunction::from_vec(grid, r.grid(self.base.data())).expect("finite resampling");
        out.scale(Complex64::new(1.0 / s, 0.0));
        debug_assert_eq!(sp.grid(), grid);
        sp.chirp(out.data_mut(), (self.kappa - kappa) * sigma * sigma);
        let before = self.base.l2_norm().powi(2);
        let after = out.l2_norm().powi(2);
        let lost = if before > 0.0 { ((before - after) / before).max(0.0) } else { 0.0 };
        (out, lost)
    }

    /// Samples `psi` on a laboratory grid, refusing when mass escapes
    /// (`GridEscape`) or the result carries energy near Nyquist (`AliasingRisk`).
    pub fn materialize(&self, grid: GridSpec, sp: &Spectral, escape_tol: f64) -> Result<WaveFunction> {
        let (out, lost) = self.reframe(0.0, 1.0, grid, sp);
        if lost > escape_tol {
            return Err(Error::GridEscape { fraction: lost });
        }
        let edge = spectral_edge_fraction(&out, sp);
        if edge > 1e-10 {
            return Err(Error::AliasingRisk(format!(
                "{edge:e} of the spectral energy lies above 0.9 of the Nyquist wavenumber"
            )));
        }
        Ok(out)
    }
}

/// Fraction of spectral energy with `max(|k1|, |k2|) > 0.9 k_max`.
pub fn spectral_edge_fraction(psi: &WaveFunction, sp: &Spectral) -> f64 {
    let grid = psi.grid();
    let mut spec = psi.data().to_vec();
    sp.fft().forward(&mut spec);
    let ks = grid.wavenumbers();
    let cut = 0.9 * grid.k_max();
    let n = grid.n();
    let mut edge = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = spec[i * n + j].norm_sqr();
            total += e;
            if ks[i].abs() > cut || ks[j].abs() > cut {
                edge += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

/// `\int_cell w(sigma |y|) dy` for every cell of `grid` (cells centred on nodes).
pub fn cell_weights(grid: GridSpec, weight: &RadialPowerLaw, sigma: f64) -> Vec<f64> {
    let n = grid.n();
    let h = grid.dx();
    let half = n / 2;
    // table over |offset| from the origin node, symmetric in its arguments
    let size = half + 1;
    let table: Vec<f64> = (0..size * size)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / size, idx % size);
            if a > b {
                return f64::NAN;
            }
            cell_integral(weight, sigma, h, a, b)
        })
        .collect();
    let lookup = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        table[a * size + b]
    };
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = i.abs_diff(half);
        for (j, v) in row.iter_mut().enumerate() {
            *v = lookup(a, j.abs_diff(half));
        }
    });
    out
}

fn cell_integral(weight: &RadialPowerLaw, sigma: f64, h: f64, a: usize, b: usize) -> f64 {
    let w = |r: f64| weight.at(sigma * r);
    if a == 0 && b == 0 {
        // inscribed disk in closed form, corners by radial quadrature
        let r0 = 0.5 * h;
        let disk = weight.disk_integral(sigma * r0) / (sigma * sigma);
        let corners = quad::integrate(
            |r| (2.0 * PI - 8.0 * (r0 / r).min(1.0).acos()) * r * w(r),
            r0,
            r0 * 2.0_f64.sqrt(),
            Tolerance::default(),
        )
        .map(|q| q.value)
        .unwrap_or(0.0);
        return disk + corners;
    }
    let near = a.max(b);
    let s = if near <= 3 {
        24
    } else if near <= 12 {
        8
    } else {
        2
    };
    let sub = h / s as f64;
    let (ya, yb) = ((a as f64 - 0.5) * h, (b as f64 - 0.5) * h);
    let mut acc = 0.0;
    for p in 0..s {
        let u = ya + (p as f64 + 0.5) * sub;
        for q in 0..s {
            let v = yb + (q as f64 + 0.5) * sub;
            acc += w(u.hypot(v));
        }
    }
    acc * sub * sub
}
