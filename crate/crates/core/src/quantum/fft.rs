//! Row-parallel 2D transforms and band-limited resampling.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Unnormalised forward / inverse transforms of an `n × n` row-major array.
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    /// Inverse transform including the `1/n^2` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
        let s = 1.0 / (self.n * self.n) as f64;
        data.par_iter_mut().for_each(|z| *z *= s);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        rows(plan, data, self.n);
        transpose(data, self.n);
        rows(plan, data, self.n);
        transpose(data, self.n);
    }
}

fn rows(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let scratch_len = plan.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| plan.process_with_scratch(row, scratch),
    );
}

/// In-place transpose of a square row-major array.
pub fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Evaluates the trigonometric interpolant of samples on `-L + j dx`
/// (`j < n`) at the lattice `z0 + i * step`, `i < n_out`, by a chirp-z
/// transform. Points with `|z| > L` return zero.
pub struct Resampler {
    n: usize,
    n_out: usize,
    half_extent: f64,
    z0: f64,
    step: f64,
    forward: Arc<dyn Fft<f64>>,
    conv_fwd: Arc<dyn Fft<f64>>,
    conv_inv: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    post: Vec<Complex64>,
    inside: Vec<bool>,
}

impl Resampler {
    pub fn new(n: usize, half_extent: f64, n_out: usize, z0: f64, step: f64) -> Self {
        let mut planner = FftPlanner::new();
        let p = (n + n_out - 1).next_power_of_two();
        let conv_fwd = planner.plan_fft_forward(p);
        let conv_inv = planner.plan_fft_inverse(p);
        let forward = planner.plan_fft_forward(n);
        let half = (n / 2) as f64;
        let shift = PI * (z0 + half_extent) / half_extent;
        let w = PI * step / half_extent;
        // spectral index m = m' - n/2 for m' in 0..n
        let pre: Vec<Complex64> = (0..n)
            .map(|mp| {
                let m = mp as f64 - half;
                let mpf = mp as f64;
                Complex64::from_polar(1.0 / n as f64, m * shift + 0.5 * w * mpf * mpf)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); p];
        for k in 0..n_out {
            let kf = k as f64;
            kernel[k] = Complex64::from_polar(1.0, -0.5 * w * kf * kf);
        }
        for k in 1..n {
            let kf = k as f64;
            kernel[p - k] = Complex64::from_polar(1.0, -0.5 * w * kf * kf);
        }
        conv_fwd.process(&mut kernel);
        let post = (0..n_out)
            .map(|i| {
                let i_f = i as f64;
                Complex64::from_polar(1.0, 0.5 * w * i_f * i_f - w * half * i_f)
            })
            .collect();
        let tol = 1e-12 * half_extent;
        let inside = (0..n_out)
            .map(|i| (z0 + i as f64 * step).abs() <= half_extent + tol)
            .collect();
        Resampler {
            n,
            n_out,
            half_extent,
            z0,
            step,
            forward,
            conv_fwd,
            conv_inv,
            pre,
            kernel_hat: kernel,
            post,
            inside,
        }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn lattice(&self) -> (f64, f64) {
        (self.z0, self.step)
    }

    /// Resamples one line of `n` values into `out` (length `n_out`).
    pub fn line(&self, input: &[Complex64], out: &mut [Complex64], work: &mut Vec<Complex64>) {
        let p = self.kernel_hat.len();
        let mut spec = input.to_vec();
        self.forward.process(&mut spec);
        work.clear();
        work.resize(p, Complex64::new(0.0, 0.0));
        // reorder to m' = m + n/2 so that m' = 0 is the most negative frequency
        let h = self.n / 2;
        for mp in 0..self.n {
            let src = (mp + self.n - h) % self.n;
            work[mp] = spec[src] * self.pre[mp];
        }
        self.conv_fwd.process(work);
        for (a, b) in work.iter_mut().zip(&self.kernel_hat) {
            *a *= b;
        }
        self.conv_inv.process(work);
        let s = 1.0 / p as f64;
        for i in 0..self.n_out {
            out[i] = if self.inside[i] {
                work[i] * self.post[i] * s
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }

    /// Separable 2D resampling of an `n × n` array into `n_out × n_out`.
    pub fn grid(&self, input: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.n, self.n_out);
        // rows first: n × m
        let mut stage = vec![Complex64::new(0.0, 0.0); n * m];
        stage
            .par_chunks_mut(m)
            .zip(input.par_chunks(n))
            .for_each_init(Vec::new, |work, (out, row)| self.line(row, out, work));
        // then columns: gather each column, resample, scatter
        let mut cols = vec![Complex64::new(0.0, 0.0); m * m];
        cols.par_chunks_mut(m).enumerate().for_each_init(
            || (Vec::new(), vec![Complex64::new(0.0, 0.0); n]),
            |(work, col), (j, out)| {
                for i in 0..n {
                    col[i] = stage[i * m + j];
                }
                self.line(col, out, work);
            },
        );
        // cols holds column j in row j: transpose back
        transpose(&mut cols, m);
        cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let n = 64;
        let data: Vec<Complex64> = (0..n * n)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut work = data.clone();
        let fft = Fft2::new(n);
        fft.forward(&mut work);
        fft.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transpose_is_involution() {
        let n = 70;
        let data: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let mut t = data.clone();
        transpose(&mut t, n);
        assert_eq!(t[1], data[n]);
        transpose(&mut t, n);
        assert_eq!(t, data);
    }

    #[test]
    fn resampling_reproduces_band_limited_line() {
        let n = 128;
        let l = 10.0;
        let dx = 2.0 * l / n as f64;
        let f = |x: f64| Complex64::new((-x * x / 2.0).exp(), 0.0) * Complex64::from_polar(1.0, 0.7 * x);
        let input: Vec<Complex64> = (0..n).map(|j| f(-l + j as f64 * dx)).collect();
        let r = Resampler::new(n, l, 100, -3.3, 0.061);
        let mut out = vec![Complex64::new(0.0, 0.0); 100];
        r.line(&input, &mut out, &mut Vec::new());
        for (i, v) in out.iter().enumerate() {
            let z = -3.3 + i as f64 * 0.061;
            assert!((v - f(z)).norm() < 1e-11, "{i}: {v} vs {}", f(z));
        }
    }

    #[test]
    fn points_outside_the_box_are_zero() {
        let n = 128;
        let input = vec![Complex64::new(1.0, 0.0); n];
        let r = Resampler::new(n, 1.0, 8, 0.9, 0.05);
        let mut out = vec![Complex64::new(0.0, 0.0); 8];
        r.line(&input, &mut out, &mut Vec::new());
        assert!((out[0] - 1.0).norm() < 1e-12);
        assert_eq!(out[7], Complex64::new(0.0, 0.0));
    }
}
