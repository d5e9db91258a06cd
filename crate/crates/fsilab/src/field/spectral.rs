//! FFT-backed spectral operators: derivatives, Leray projection, diffusion
//! factors and the 2/3-rule dealiasing filter.
//!
//! Transforms are unnormalized on the forward pass; the inverse divides by
//! `N^2`. Plans are cached globally per transform size.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use super::{Grid2D, ScalarField, TensorField, VectorField};
use crate::error::{Error, Result};

struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLAN_CACHE: Lazy<Mutex<HashMap<usize, Arc<Plans>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> Arc<Plans> {
    let mut cache = PLAN_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(buf: &mut [Complex64], tmp: &mut [Complex64], n: usize) {
    tmp.copy_from_slice(buf);
    for iy in 0..n {
        for ix in 0..n {
            buf[ix * n + iy] = tmp[iy * n + ix];
        }
    }
}

fn fft2_inplace(buf: &mut [Complex64], n: usize, forward: bool) {
    let plans = plans(n);
    let fft = if forward { &plans.fwd } else { &plans.inv };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(buf, &mut tmp, n);
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(buf, &mut tmp, n);
}

/// A scalar field in spectral representation together with its grid.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub grid: Grid2D,
    pub modes: Vec<Complex64>,
}

impl Spectral {
    pub fn forward(f: &ScalarField) -> Spectral {
        let n = f.grid.n();
        let mut modes: Vec<Complex64> =
            f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2_inplace(&mut modes, n, true);
        Spectral { grid: f.grid, modes }
    }

    pub fn inverse(&self) -> ScalarField {
        let n = self.grid.n();
        let mut buf = self.modes.clone();
        fft2_inplace(&mut buf, n, false);
        let scale = 1.0 / (n * n) as f64;
        ScalarField {
            grid: self.grid,
            data: buf.iter().map(|c| c.re * scale).collect(),
        }
    }

    pub fn zeros(grid: Grid2D) -> Spectral {
        Spectral { grid, modes: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Multiply every mode by a function of the wavenumber pair.
    pub fn mul_symbol(&mut self, mut sym: impl FnMut(f64, f64) -> Complex64) {
        let n = self.grid.n();
        for iy in 0..n {
            let ky = self.grid.wavenumber(iy);
            for ix in 0..n {
                let kx = self.grid.wavenumber(ix);
                self.modes[iy * n + ix] *= sym(kx, ky);
            }
        }
    }

    pub fn derivative_x(&self) -> Spectral {
        let mut out = self.clone();
        out.mul_symbol(|kx, _| Complex64::new(0.0, kx));
        out
    }

    pub fn derivative_y(&self) -> Spectral {
        let mut out = self.clone();
        out.mul_symbol(|_, ky| Complex64::new(0.0, ky));
        out
    }

    /// Zero all modes with axis index magnitude above `n/3` (2/3 rule).
    pub fn dealias(&mut self) {
        let n = self.grid.n();
        let cut = n / 3;
        for iy in 0..n {
            let my = if iy <= n / 2 { iy } else { n - iy };
            for ix in 0..n {
                let mx = if ix <= n / 2 { ix } else { n - ix };
                if mx > cut || my > cut {
                    self.modes[iy * n + ix] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Parseval sum: `h^2 * sum |f|^2` computed from the modes.
    pub fn energy(&self) -> f64 {
        let n2 = self.grid.len() as f64;
        let h2 = self.grid.spacing() * self.grid.spacing();
        self.modes.iter().map(|c| c.norm_sqr()).sum::<f64>() * h2 / n2
    }
}

/// Velocity field in spectral representation.
#[derive(Debug, Clone)]
pub struct SpectralVec {
    pub x: Spectral,
    pub y: Spectral,
}

impl SpectralVec {
    pub fn forward(v: &VectorField) -> SpectralVec {
        SpectralVec {
            x: Spectral::forward(&ScalarField { grid: v.grid, data: v.x.clone() }),
            y: Spectral::forward(&ScalarField { grid: v.grid, data: v.y.clone() }),
        }
    }

    pub fn inverse(&self) -> VectorField {
        let sx = self.x.inverse();
        let sy = self.y.inverse();
        VectorField { grid: sx.grid, x: sx.data, y: sy.data }
    }

    /// In-place Leray projection: remove the gradient part mode by mode.
    /// The zero mode (the mean) is untouched.
    pub fn leray_inplace(&mut self) {
        let grid = self.x.grid;
        let n = grid.n();
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for ix in 0..n {
                let kx = grid.wavenumber(ix);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    continue;
                }
                let i = iy * n + ix;
                let d = (kx * self.x.modes[i] + ky * self.y.modes[i]) / k2;
                self.x.modes[i] -= kx * d;
                self.y.modes[i] -= ky * d;
            }
        }
    }

    /// Multiply both components by the diffusion factor `exp(-nu k^2 dt)`.
    pub fn diffuse_inplace(&mut self, nu: f64, dt: f64) {
        let grid = self.x.grid;
        let n = grid.n();
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for ix in 0..n {
                let kx = grid.wavenumber(ix);
                let e = (-nu * (kx * kx + ky * ky) * dt).exp();
                let i = iy * n + ix;
                self.x.modes[i] *= e;
                self.y.modes[i] *= e;
            }
        }
    }

    pub fn dealias(&mut self) {
        self.x.dealias();
        self.y.dealias();
    }

    pub fn add_assign(&mut self, other: &SpectralVec, a: f64) {
        for (u, v) in self.x.modes.iter_mut().zip(&other.x.modes) {
            *u += a * v;
        }
        for (u, v) in self.y.modes.iter_mut().zip(&other.y.modes) {
            *u += a * v;
        }
    }

    /// `h^2 sum |u|^2` over both components via Parseval.
    pub fn energy(&self) -> f64 {
        self.x.energy() + self.y.energy()
    }

    /// `2 nu * h^2 sum |D(u)|^2` from the modes (the viscous dissipation
    /// rate of the deformation tensor).
    pub fn dissipation_rate(&self, nu: f64) -> f64 {
        let grid = self.x.grid;
        let n = grid.n();
        let n2 = grid.len() as f64;
        let h2 = grid.spacing() * grid.spacing();
        let mut s = 0.0;
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for ix in 0..n {
                let kx = grid.wavenumber(ix);
                let i = iy * n + ix;
                let uxx = Complex64::new(0.0, kx) * self.x.modes[i];
                let uyy = Complex64::new(0.0, ky) * self.y.modes[i];
                let uxy = Complex64::new(0.0, 0.5) * (ky * self.x.modes[i] + kx * self.y.modes[i]);
                s += uxx.norm_sqr() + uyy.norm_sqr() + 2.0 * uxy.norm_sqr();
            }
        }
        2.0 * nu * s * h2 / n2
    }
}

/// Leray projection of a sampled velocity field.
///
/// The output is solenoidal to spectral accuracy; the mean per component is
/// preserved exactly and the projection is L2-orthogonal.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    v.check_finite("leray_project input")?;
    let mut sv = SpectralVec::forward(v);
    sv.leray_inplace();
    Ok(sv.inverse())
}

/// Spectral divergence of a velocity field.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    v.check_finite("divergence input")?;
    let sv = SpectralVec::forward(v);
    Ok(divergence_spectral(&sv))
}

pub fn divergence_spectral(sv: &SpectralVec) -> ScalarField {
    let grid = sv.x.grid;
    let n = grid.n();
    let mut out = Spectral::zeros(grid);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            let i = iy * n + ix;
            out.modes[i] = Complex64::new(0.0, kx) * sv.x.modes[i]
                + Complex64::new(0.0, ky) * sv.y.modes[i];
        }
    }
    out.inverse()
}

/// Spectral scalar curl `dx uy - dy ux`.
pub fn curl(v: &VectorField) -> Result<ScalarField> {
    v.check_finite("curl input")?;
    let sv = SpectralVec::forward(v);
    let grid = sv.x.grid;
    let n = grid.n();
    let mut out = Spectral::zeros(grid);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            let i = iy * n + ix;
            out.modes[i] = Complex64::new(0.0, kx) * sv.y.modes[i]
                - Complex64::new(0.0, ky) * sv.x.modes[i];
        }
    }
    Ok(out.inverse())
}

/// Symmetric deformation tensor `D(u) = (grad u + grad u^T)/2`, spectrally.
pub fn deformation(v: &VectorField) -> Result<TensorField> {
    v.check_finite("deformation input")?;
    let sv = SpectralVec::forward(v);
    let uxx = sv.x.derivative_x().inverse();
    let uxy = sv.x.derivative_y().inverse();
    let uyx = sv.y.derivative_x().inverse();
    let uyy = sv.y.derivative_y().inverse();
    let grid = v.grid;
    let mut t = TensorField::zeros(grid);
    for i in 0..grid.len() {
        t.xx[i] = uxx.data[i];
        t.yy[i] = uyy.data[i];
        t.xy[i] = 0.5 * (uxy.data[i] + uyx.data[i]);
    }
    Ok(t)
}

/// Perp-gradient `(-psi_y, psi_x)` of a scalar stream function; the result
/// is solenoidal by construction.
pub fn perp_gradient(psi: &ScalarField) -> Result<VectorField> {
    psi.check_finite("perp_gradient input")?;
    let sp = Spectral::forward(psi);
    let px = sp.derivative_x().inverse();
    let py = sp.derivative_y().inverse();
    Ok(VectorField {
        grid: psi.grid,
        x: py.data.iter().map(|v| -v).collect(),
        y: px.data,
    })
}

/// Divergence of a symmetric tensor field, `(div F)_i = d_j F_ij`.
pub fn tensor_divergence(f: &TensorField) -> Result<VectorField> {
    let sxx = Spectral::forward(&ScalarField { grid: f.grid, data: f.xx.clone() });
    let sxy = Spectral::forward(&ScalarField { grid: f.grid, data: f.xy.clone() });
    let syy = Spectral::forward(&ScalarField { grid: f.grid, data: f.yy.clone() });
    let gx = {
        let mut a = sxx.derivative_x();
        let b = sxy.derivative_y();
        for (u, v) in a.modes.iter_mut().zip(&b.modes) {
            *u += v;
        }
        a.inverse()
    };
    let gy = {
        let mut a = sxy.derivative_x();
        let b = syy.derivative_y();
        for (u, v) in a.modes.iter_mut().zip(&b.modes) {
            *u += v;
        }
        a.inverse()
    };
    Ok(VectorField { grid: f.grid, x: gx.data, y: gy.data })
}

/// Solve `lap psi = w` spectrally with zero-mean convention.
pub fn inverse_laplacian(w: &ScalarField) -> Result<ScalarField> {
    w.check_finite("inverse_laplacian input")?;
    let grid = w.grid;
    let n = grid.n();
    let mut sp = Spectral::forward(w);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            let k2 = kx * kx + ky * ky;
            let i = iy * n + ix;
            if k2 == 0.0 {
                sp.modes[i] = Complex64::new(0.0, 0.0);
            } else {
                sp.modes[i] /= -k2;
            }
        }
    }
    Ok(sp.inverse())
}

/// Velocity with prescribed vorticity: `u = grad^perp lap^{-1} w`, the
/// periodic surrogate of the whole-plane kernel. The vorticity must be
/// mean-zero for the inversion to make sense.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    omega.check_finite("biot_savart input")?;
    let total = omega.integral().abs();
    let scale = omega.max_abs() * omega.grid.side() * omega.grid.side();
    if scale > 0.0 && total / scale > 1e-8 {
        return Err(Error::MeanZero { relative: total / scale });
    }
    let psi = inverse_laplacian(omega)?;
    perp_gradient(&psi)
}
