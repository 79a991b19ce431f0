use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Complex amplitudes on a square grid, row-major with the first index
/// along `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    data: Vec<Complex64>,
}

impl WaveFunction {
    pub fn zeros(grid: GridSpec) -> Self {
        WaveFunction {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_vec(grid: GridSpec, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        Ok(WaveFunction { grid, data })
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let xs = grid.coords();
        let n = grid.n();
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(xs[i], xs[j]);
            }
        });
        WaveFunction { grid, data }
    }

    /// `(pi w^2)^(-1/2) exp(-|x - c|^2 / (2 w^2) + i k.x)`, unit `L^2` norm.
    pub fn gaussian(grid: GridSpec, center: [f64; 2], momentum: [f64; 2], width: f64) -> Self {
        let norm = 1.0 / (PI.sqrt() * width);
        Self::from_fn(grid, |x1, x2| {
            let (d1, d2) = (x1 - center[0], x2 - center[1]);
            let r2 = (d1 * d1 + d2 * d2) / (2.0 * width * width);
            Complex64::from_polar(norm * (-r2).exp(), momentum[0] * x1 + momentum[1] * x2)
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.grid.n() + j]
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.par_iter_mut().for_each(|z| *z *= c);
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Pointwise product with a radial function of `|x|`.
    pub fn multiply_radial(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let xs = self.grid.coords();
        let n = self.grid.n();
        let mut out = self.clone();
        out.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= f(xs[i].hypot(xs[j]));
            }
        });
        out
    }

    pub fn l2_norm(&self) -> f64 {
        (ordered_sum(&self.data, |z| z.norm_sqr()) * self.grid.cell_area()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        ordered_sum(&self.data, |z| z.norm()) * self.grid.cell_area()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `(\int |x|^2 |psi|^2)^(1/2) / ||psi||_2`.
    pub fn second_moment(&self) -> f64 {
        let xs = self.grid.coords();
        let n = self.grid.n();
        let rows: Vec<f64> = self
            .data
            .par_chunks(n)
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, z)| (xs[i] * xs[i] + xs[j] * xs[j]) * z.norm_sqr())
                    .sum()
            })
            .collect();
        let m2: f64 = rows.iter().sum::<f64>() * self.grid.cell_area();
        m2.sqrt() / self.l2_norm()
    }

    /// `||a - b||_2` on a shared grid.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let diffs: Vec<Complex64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok((ordered_sum(&diffs, |z| z.norm_sqr()) * self.grid.cell_area()).sqrt())
    }

    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_area())
    }

    fn check_same_grid(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("wavefunctions live on different grids".into()));
        }
        Ok(())
    }

    /// Fraction of `|psi|^2` in the outer 10% band of the grid.
    pub fn frame_fraction(&self) -> f64 {
        let n = self.grid.n();
        let mut edge = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.data[i * n + j].norm_sqr();
                total += w;
                if self.grid.in_outer_frame(i, j) {
                    edge += w;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Angle-averaged density in radial bins of width `dr` out to `L`.
    pub fn radial_profile(&self, dr: f64) -> Vec<(f64, f64)> {
        let xs = self.grid.coords();
        let n = self.grid.n();
        let bins = (self.grid.half_extent() / dr).floor() as usize;
        let mut sum = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for i in 0..n {
            for j in 0..n {
                let b = (xs[i].hypot(xs[j]) / dr) as usize;
                if b < bins {
                    sum[b] += self.data[i * n + j].norm_sqr();
                    count[b] += 1;
                }
            }
        }
        (0..bins)
            .filter(|&b| count[b] > 0)
            .map(|b| ((b as f64 + 0.5) * dr, sum[b] / count[b] as f64))
            .collect()
    }

    /// Little-endian header `(n: u32, 0: u32, L: f64)` then `(re, im)` pairs.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(16 + 16 * self.data.len());
        buf.extend_from_slice(&(self.grid.n() as u32).to_le_bytes());
        buf.extend_from_slice(&0u32.to_le_bytes());
        buf.extend_from_slice(&self.grid.half_extent().to_le_bytes());
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("wavefunction file: {e}"));
        let mut head = [0u8; 16];
        r.read_exact(&mut head).map_err(io)?;
        let n = u32::from_le_bytes(head[0..4].try_into().unwrap()) as usize;
        let l = f64::from_le_bytes(head[8..16].try_into().unwrap());
        let grid = GridSpec::new(n, l)?;
        let mut body = vec![0u8; 16 * grid.len()];
        r.read_exact(&mut body).map_err(io)?;
        let data = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_vec(grid, data)
    }
}

/// Sum of `f(z)` row by row in index order, independent of thread count.
pub(crate) fn ordered_sum(data: &[Complex64], f: impl Fn(&Complex64) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = data
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum())
        .collect();
    partial.iter().sum()
}
