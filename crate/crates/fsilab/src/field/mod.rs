//! Grids, sampled fields and the norm machinery used everywhere else.
//!
//! The computational domain is the doubly periodic square `[-L/2, L/2)^2`
//! sampled on an `N x N` lattice. Fields are stored row-major with
//! `idx = iy * n + ix`, node coordinates `x = -L/2 + ix*h`, `y = -L/2 + iy*h`.

mod norms;
pub mod spectral;

pub use norms::{beta_int, fit_loglog, lp_norm, weighted_sup_norm};
pub use spectral::{
    biot_savart, curl, deformation, divergence, inverse_laplacian, leray_project, perp_gradient,
    tensor_divergence, Spectral, SpectralVec,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid on `[-L/2, L/2)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    /// Build a grid with side length `l` and `n` samples per axis.
    ///
    /// `n` must be even and at least 16; `l` must be positive.
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::GridParam(format!("side length must be positive, got {l}")));
        }
        if n % 2 != 0 {
            return Err(Error::GridParam(format!("N must be even, got {n}")));
        }
        if n < 16 {
            return Err(Error::GridParam(format!("N must be >= 16, got {n}")));
        }
        Ok(Grid2D { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn side(&self) -> f64 {
        self.l
    }

    /// Grid spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Node coordinate along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.l + self.spacing() * i as f64
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// Signed wavenumber for FFT bin `i`, with the Nyquist mode zeroed
    /// (it has no odd-symmetric partner, so derivatives treat it as
    /// real-symmetric).
    pub fn wavenumber(&self, i: usize) -> f64 {
        let n = self.n;
        if i == n / 2 {
            return 0.0;
        }
        let signed = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
        2.0 * std::f64::consts::PI / self.l * signed
    }

    /// Full wavenumber table (one axis).
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Minimal-image displacement `a - b` on the periodic axis.
    pub fn min_image(&self, d: f64) -> f64 {
        let l = self.l;
        let mut d = d % l;
        if d < -0.5 * l {
            d += l;
        } else if d >= 0.5 * l {
            d -= l;
        }
        d
    }

    /// Periodic distance between points `a` and `b`.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = self.min_image(a[0] - b[0]);
        let dy = self.min_image(a[1] - b[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Wrap a point into the fundamental domain `[-L/2, L/2)`.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        [self.min_image(p[0]), self.min_image(p[1])]
    }
}

/// Scalar samples on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField { grid, data: vec![0.0; grid.len()] }
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = vec![0.0; grid.len()];
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                data[iy * n + ix] = f(grid.coord(ix), y);
            }
        }
        ScalarField { grid, data }
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    /// Node sum times `h^2` (trapezoidal quadrature on the torus).
    pub fn integral(&self) -> f64 {
        let h2 = self.grid.spacing() * self.grid.spacing();
        self.data.iter().sum::<f64>() * h2
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an arbitrary point (periodic).
    pub fn interp(&self, p: [f64; 2]) -> f64 {
        let n = self.grid.n();
        let h = self.grid.spacing();
        let fx = (p[0] + 0.5 * self.grid.side()) / h;
        let fy = (p[1] + 0.5 * self.grid.side()) / h;
        let ix = fx.floor();
        let iy = fy.floor();
        let tx = fx - ix;
        let ty = fy - iy;
        let wrap = |i: f64| -> usize { (i.rem_euclid(n as f64)) as usize % n };
        let (i0, i1) = (wrap(ix), wrap(ix + 1.0));
        let (j0, j1) = (wrap(iy), wrap(iy + 1.0));
        let v00 = self.data[j0 * n + i0];
        let v10 = self.data[j0 * n + i1];
        let v01 = self.data[j1 * n + i0];
        let v11 = self.data[j1 * n + i1];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }
}

/// Two-component velocity samples on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        VectorField { grid, x: vec![0.0; grid.len()], y: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.n();
        let mut fx = vec![0.0; grid.len()];
        let mut fy = vec![0.0; grid.len()];
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                let v = f(grid.coord(ix), y);
                fx[iy * n + ix] = v[0];
                fy[iy * n + ix] = v[1];
            }
        }
        VectorField { grid, x: fx, y: fy }
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.x.iter().chain(self.y.iter()).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    /// Pointwise magnitude as a scalar field.
    pub fn magnitude(&self) -> ScalarField {
        let data = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .collect();
        ScalarField { grid: self.grid, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField {
            grid: self.grid,
            x: self.x.iter().map(|v| a * v).collect(),
            y: self.y.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &VectorField, a: f64) {
        for (u, v) in self.x.iter_mut().zip(&other.x) {
            *u += a * v;
        }
        for (u, v) in self.y.iter_mut().zip(&other.y) {
            *u += a * v;
        }
    }

    /// Plain L2 distance to another field (no density weight).
    pub fn l2_distance(&self, other: &VectorField) -> f64 {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut s = 0.0;
        for i in 0..self.x.len() {
            let dx = self.x[i] - other.x[i];
            let dy = self.y[i] - other.y[i];
            s += dx * dx + dy * dy;
        }
        (s * h2).sqrt()
    }

    pub fn interp(&self, p: [f64; 2]) -> [f64; 2] {
        let sx = ScalarField { grid: self.grid, data: self.x.clone() };
        let sy = ScalarField { grid: self.grid, data: self.y.clone() };
        [sx.interp(p), sy.interp(p)]
    }
}

/// Symmetric 2x2 tensor samples (xx, xy, yy) on a [`Grid2D`].
#[derive(Debug, Clone)]
pub struct TensorField {
    pub grid: Grid2D,
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: Grid2D) -> Self {
        TensorField {
            grid,
            xx: vec![0.0; grid.len()],
            xy: vec![0.0; grid.len()],
            yy: vec![0.0; grid.len()],
        }
    }

    /// Frobenius magnitude, counting the off-diagonal entry twice.
    pub fn magnitude(&self) -> ScalarField {
        let data = (0..self.xx.len())
            .map(|i| {
                (self.xx[i] * self.xx[i] + 2.0 * self.xy[i] * self.xy[i] + self.yy[i] * self.yy[i])
                    .sqrt()
            })
            .collect();
        ScalarField { grid: self.grid, data }
    }
}

/// A labelled time series of nonnegative norm values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl NormSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::EmptySeries);
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config("series times must be strictly increasing".into()));
            }
        }
        if times[0] <= 0.0 {
            return Err(Error::Config("series times must be positive".into()));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::NonFinite("norm series values"));
        }
        Ok(NormSeries { times, values, label: label.into() })
    }
}
