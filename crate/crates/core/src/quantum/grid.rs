use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square grid `x = -L + i dx`, `i = 0..n`, `dx = 2L/n`, on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    n: usize,
    half_extent: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    #[serde(rename = "L")]
    half_extent: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.n, raw.half_extent)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            n: g.n,
            half_extent: g.half_extent,
        }
    }
}

pub const ALLOWED_SIZES: [usize; 4] = [128, 256, 512, 1024];

impl GridSpec {
    pub fn new(n: usize, half_extent: f64) -> Result<Self> {
        if !ALLOWED_SIZES.contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "grid size n = {n} must be one of {ALLOWED_SIZES:?}"
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half extent L = {half_extent} must be > 0"
            )));
        }
        Ok(GridSpec { n, half_extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }
    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }
    pub fn len(&self) -> usize {
        self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.dx()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Angular wavenumbers in transform order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = std::f64::consts::PI / self.half_extent;
        (0..self.n)
            .map(|m| {
                let s = if m < self.n / 2 { m as i64 } else { m as i64 - self.n as i64 };
                s as f64 * dk
            })
            .collect()
    }

    /// Largest representable wavenumber `pi / dx`.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }

    /// Whether `(i, j)` lies in the outer 10% band on either axis.
    pub fn in_outer_frame(&self, i: usize, j: usize) -> bool {
        let band = self.n / 10;
        i < band || j < band || i >= self.n - band || j >= self.n - band
    }
}
