//! Rigid-disk state, mass scalings, indicator masks, rigid averaging and the
//! momentum-conserving rigid projection.
//!
//! The projection constrains the velocity to be rigid on the disk's core
//! nodes while staying solenoidal. It is computed exactly through a
//! precomputed dense system coupling the core nodes via the Leray kernel,
//! which is what the interior-replacement / re-projection sweep converges to.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField, Spectral, VectorField};
use crate::field::spectral::SpectralVec;

/// How the disk's inertia scales as it shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassScaling {
    /// Density fixed: `m = eps^2 m1`, `J = eps^4 J1`.
    Massless,
    /// Mass fixed: `rho_s = m1 / (pi eps^2)`, `J = eps^2 J1`.
    Massive,
    /// Take `rho_s` at face value with no `eps` interpretation.
    None,
}

/// Disk radius, density, mass, inertia and the fluid viscosity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolidParams {
    pub eps: f64,
    pub rho_s: f64,
    pub m: f64,
    pub j: f64,
    pub nu: f64,
}

impl SolidParams {
    /// Build parameters for a uniform disk. For the massive scaling,
    /// `rho_ref` is the density the disk would have at radius 1 (so the
    /// mass `m = rho_ref * pi` is held fixed as `eps` shrinks).
    pub fn new(eps: f64, rho_ref: f64, scaling: MassScaling, nu: f64) -> Result<Self> {
        if !(eps > 0.0) || !(rho_ref > 0.0) || !(nu > 0.0) {
            return Err(Error::Config(format!(
                "solid parameters must be positive (eps={eps}, rho={rho_ref}, nu={nu})"
            )));
        }
        let rho_s = match scaling {
            MassScaling::Massless | MassScaling::None => rho_ref,
            MassScaling::Massive => rho_ref / (eps * eps),
        };
        let (m, j) = mass_of(eps, rho_s)?;
        Ok(SolidParams { eps, rho_s, m, j, nu })
    }
}

/// Uniform-disk mass and moment of inertia: `m = rho pi eps^2`,
/// `J = m eps^2 / 2`.
pub fn mass_of(eps: f64, rho_s: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) || !(rho_s > 0.0) {
        return Err(Error::Config(format!("mass_of requires positive inputs, got ({eps}, {rho_s})")));
    }
    let m = rho_s * std::f64::consts::PI * eps * eps;
    Ok((m, m * eps * eps / 2.0))
}

/// Center position, rotation angle and rigid velocities of the disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolidState {
    pub h: [f64; 2],
    pub theta: f64,
    pub ell: [f64; 2],
    pub r: f64,
}

impl SolidState {
    pub fn at_rest(h: [f64; 2]) -> Self {
        SolidState { h, theta: 0.0, ell: [0.0, 0.0], r: 0.0 }
    }

    pub fn check_finite(&self) -> Result<()> {
        let ok = self.h.iter().chain(self.ell.iter()).all(|v| v.is_finite())
            && self.theta.is_finite()
            && self.r.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("solid state"))
        }
    }
}

/// C-infinity step from 0 at `s<=0` to 1 at `s>=1` built from `exp(-1/s)`.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let fa = (-1.0 / s).exp();
    let fb = (-1.0 / (1.0 - s)).exp();
    fa / (fa + fb)
}

/// First moment of the ramp profile used by [`indicator_mask`], needed for
/// the area-preserving shift of the ramp center.
fn ramp_first_moment(width: f64) -> f64 {
    // g(u) = profile(u) - step(u) is odd; integrate u * g over [0, w/2].
    let half = 0.5 * width;
    let n = 400;
    let du = half / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let u = (i as f64 + 0.5) * du;
        let profile = 1.0 - smoothstep((u + half) / width);
        s += profile * u * du;
    }
    2.0 * s
}

/// Smoothed indicator of the disk `B(h, eps)`.
///
/// The ramp center is shifted slightly inward so the continuum area of the
/// profile equals `pi eps^2`; with `smoothing_width = 0` the sharp indicator
/// is returned.
pub fn indicator_mask(
    grid: Grid2D,
    state: &SolidState,
    eps: f64,
    smoothing_width: f64,
) -> Result<ScalarField> {
    let h = grid.spacing();
    if eps < 3.0 * h {
        return Err(Error::UnderResolved { need: 3.0 * h, got: eps });
    }
    if eps >= grid.side() / 8.0 {
        return Err(Error::Config(format!(
            "disk radius {eps} too large for the domain (must be < L/8 = {})",
            grid.side() / 8.0
        )));
    }
    if smoothing_width < 0.0 {
        return Err(Error::Config("smoothing width must be nonnegative".into()));
    }
    let center = state.h;
    if smoothing_width == 0.0 {
        return Ok(ScalarField::from_fn(grid, |x, y| {
            if grid.distance([x, y], center) < eps {
                1.0
            } else {
                0.0
            }
        }));
    }
    let m1 = ramp_first_moment(smoothing_width);
    let rc = (eps * eps - 2.0 * m1).max(0.25 * eps * eps).sqrt();
    let w = smoothing_width;
    Ok(ScalarField::from_fn(grid, |x, y| {
        let d = grid.distance([x, y], center);
        1.0 - smoothstep((d - (rc - 0.5 * w)) / w)
    }))
}

/// Mask-weighted rigid components of a velocity field: the translational
/// mean and the angular rate normalized by the discrete second moment.
pub fn rigid_average(
    v: &VectorField,
    mask: &ScalarField,
    state: &SolidState,
) -> Result<([f64; 2], f64)> {
    if v.grid != mask.grid {
        return Err(Error::GridMismatch);
    }
    let grid = v.grid;
    let n = grid.n();
    let mut wsum = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    let mut ang = 0.0;
    let mut second = 0.0;
    let mut bx = 0.0;
    let mut by = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            let w = mask.data[i];
            if w == 0.0 {
                continue;
            }
            let dx = grid.min_image(grid.coord(ix) - state.h[0]);
            let dy = grid.min_image(grid.coord(iy) - state.h[1]);
            wsum += w;
            mx += w * v.x[i];
            my += w * v.y[i];
            ang += w * (-dy * v.x[i] + dx * v.y[i]);
            second += w * (dx * dx + dy * dy);
            bx += w * (-dy);
            by += w * dx;
        }
    }
    if wsum <= 0.0 || second <= 0.0 {
        return Err(Error::ZeroMaskMass);
    }
    // 3x3 moment system so the decomposition is exact even when the lattice
    // breaks the disk's symmetry about h.
    let a = nalgebra::Matrix3::new(wsum, 0.0, bx, 0.0, wsum, by, bx, by, second);
    let rhs = nalgebra::Vector3::new(mx, my, ang);
    let sol = a.lu().solve(&rhs).ok_or(Error::ZeroMaskMass)?;
    Ok(([sol[0], sol[1]], sol[2]))
}

// ---------------------------------------------------------------------------
// Rigid projection
// ---------------------------------------------------------------------------

/// Leray kernel tabulated on the lattice: `K_ab(x_i - x_j)` is the response
/// at node i of projecting a unit impulse at node j. Shared per grid.
struct LerayKernel {
    n: usize,
    kxx: Vec<f64>,
    kxy: Vec<f64>,
    kyy: Vec<f64>,
}

static KERNEL_CACHE: Lazy<Mutex<HashMap<(usize, u64), Arc<LerayKernel>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn leray_kernel(grid: Grid2D) -> Arc<LerayKernel> {
    let key = (grid.n(), grid.side().to_bits());
    let mut cache = KERNEL_CACHE.lock().unwrap();
    cache
        .entry(key)
        .or_insert_with(|| {
            let n = grid.n();
            let mut sxx = Spectral::zeros(grid);
            let mut sxy = Spectral::zeros(grid);
            let mut syy = Spectral::zeros(grid);
            for iy in 0..n {
                let ky = grid.wavenumber(iy);
                for ix in 0..n {
                    let kx = grid.wavenumber(ix);
                    let k2 = kx * kx + ky * ky;
                    if k2 == 0.0 {
                        continue;
                    }
                    let i = iy * n + ix;
                    sxx.modes[i] = (kx * kx / k2).into();
                    sxy.modes[i] = (kx * ky / k2).into();
                    syy.modes[i] = (ky * ky / k2).into();
                }
            }
            Arc::new(LerayKernel {
                n,
                kxx: sxx.inverse().data,
                kxy: sxy.inverse().data,
                kyy: syy.inverse().data,
            })
        })
        .clone()
}

/// Precomputed rigid projector for one disk position and density layout.
///
/// Immutable after construction; applying it is re-entrant.
pub struct DiskProjector {
    grid: Grid2D,
    /// Core node linear indices (mask >= 1/2) and their offsets from h.
    nodes: Vec<usize>,
    off_x: Vec<f64>,
    off_y: Vec<f64>,
    /// rho * indicator weights on the core and the 3x3 moment system.
    weights: Vec<f64>,
    moment: nalgebra::Matrix3<f64>,
    /// Eigen pseudo-inverse of the core-to-core Leray coupling.
    eig_vecs: DMatrix<f64>,
    eig_inv: DVector<f64>,
    /// Global density field (1 outside, blended to rho_s inside).
    pub rho: ScalarField,
    rho_sum: f64,
}

/// Relative eigenvalue cutoff for the force system. Forces below it excite
/// essentially no solenoidal response and are dropped.
const FORCE_EIG_CUTOFF: f64 = 1e-10;

impl DiskProjector {
    pub fn new(mask: &ScalarField, state: &SolidState, rho_s: f64) -> Result<Self> {
        let grid = mask.grid;
        let n = grid.n();
        let mut nodes = Vec::new();
        let mut off_x = Vec::new();
        let mut off_y = Vec::new();
        let mut weights = Vec::new();
        let mut rho = vec![0.0; grid.len()];
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                let m = mask.data[i];
                rho[i] = 1.0 + (rho_s - 1.0) * m;
                if m >= 0.5 {
                    nodes.push(i);
                    off_x.push(grid.min_image(grid.coord(ix) - state.h[0]));
                    off_y.push(grid.min_image(grid.coord(iy) - state.h[1]));
                    weights.push(rho[i]);
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::ZeroMaskMass);
        }
        let mut wsum = 0.0;
        let mut bx = 0.0;
        let mut by = 0.0;
        let mut second = 0.0;
        for k in 0..nodes.len() {
            wsum += weights[k];
            bx += weights[k] * (-off_y[k]);
            by += weights[k] * off_x[k];
            second += weights[k] * (off_x[k] * off_x[k] + off_y[k] * off_y[k]);
        }
        let moment = nalgebra::Matrix3::new(wsum, 0.0, bx, 0.0, wsum, by, bx, by, second);

        let kernel = leray_kernel(grid);
        let nc = nodes.len();
        let mut g = DMatrix::<f64>::zeros(2 * nc, 2 * nc);
        for a in 0..nc {
            let (aiy, aix) = (nodes[a] / n, nodes[a] % n);
            for b in 0..nc {
                let (biy, bix) = (nodes[b] / n, nodes[b] % n);
                let dy = (aiy + n - biy) % n;
                let dx = (aix + n - bix) % n;
                let ki = dy * kernel.n + dx;
                let delta = if a == b { 1.0 } else { 0.0 };
                g[(2 * a, 2 * b)] = delta - kernel.kxx[ki];
                g[(2 * a, 2 * b + 1)] = -kernel.kxy[ki];
                g[(2 * a + 1, 2 * b)] = -kernel.kxy[ki];
                g[(2 * a + 1, 2 * b + 1)] = delta - kernel.kyy[ki];
            }
        }
        let eig = g.symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
        let inv = eig.eigenvalues.map(|l| {
            if l > FORCE_EIG_CUTOFF * lmax {
                1.0 / l
            } else {
                0.0
            }
        });
        let rho_field = ScalarField { grid, data: rho };
        let rho_sum = rho_field.data.iter().sum::<f64>();
        Ok(DiskProjector {
            grid,
            nodes,
            off_x,
            off_y,
            weights,
            moment,
            eig_vecs: eig.eigenvectors,
            eig_inv: inv,
            rho: rho_field,
            rho_sum,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Number of constrained core nodes.
    pub fn core_size(&self) -> usize {
        self.nodes.len()
    }

    /// Momentum-fit rigid components of a field over the core
    /// (rho-weighted, exact 3x3 solve).
    pub fn rigid_fit(&self, v: &VectorField) -> ([f64; 2], f64) {
        let mut mx = 0.0;
        let mut my = 0.0;
        let mut ang = 0.0;
        for (k, &i) in self.nodes.iter().enumerate() {
            let w = self.weights[k];
            mx += w * v.x[i];
            my += w * v.y[i];
            ang += w * (-self.off_y[k] * v.x[i] + self.off_x[k] * v.y[i]);
        }
        let sol = self
            .moment
            .lu()
            .solve(&nalgebra::Vector3::new(mx, my, ang))
            .expect("moment system is SPD");
        ([sol[0], sol[1]], sol[2])
    }

    /// rho-weighted total momentum of a field.
    pub fn weighted_momentum(&self, v: &VectorField) -> [f64; 2] {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut px = 0.0;
        let mut py = 0.0;
        for i in 0..v.x.len() {
            px += self.rho.data[i] * v.x[i];
            py += self.rho.data[i] * v.y[i];
        }
        [px * h2, py * h2]
    }

    /// Apply the projection in spectral space. Returns the projected field
    /// (also left in `sv`) together with the rigid components enforced on
    /// the core.
    pub fn project_spectral(&self, sv: &mut SpectralVec) -> (VectorField, [f64; 2], f64) {
        sv.leray_inplace();
        let v = sv.inverse();
        let momentum_before = self.weighted_momentum(&v);
        let (ell, r) = self.rigid_fit(&v);
        let nc = self.nodes.len();
        let mut rhs = DVector::<f64>::zeros(2 * nc);
        for k in 0..nc {
            let i = self.nodes[k];
            rhs[2 * k] = (ell[0] - r * self.off_y[k]) - v.x[i];
            rhs[2 * k + 1] = (ell[1] + r * self.off_x[k]) - v.y[i];
        }
        let mu = &self.eig_vecs * (self.eig_inv.component_mul(&(self.eig_vecs.transpose() * rhs)));
        let mut fx = ScalarField::zeros(self.grid);
        let mut fy = ScalarField::zeros(self.grid);
        for k in 0..nc {
            fx.data[self.nodes[k]] = mu[2 * k];
            fy.data[self.nodes[k]] = mu[2 * k + 1];
        }
        let mut corr = SpectralVec::forward(&VectorField { grid: self.grid, x: fx.data, y: fy.data });
        corr.leray_inplace();
        sv.add_assign(&corr, 1.0);
        let mut out = sv.inverse();
        // Restore the rho-weighted linear momentum exactly with a constant
        // (solenoidal, rigid-compatible) shift.
        let momentum_after = self.weighted_momentum(&out);
        let h2 = self.grid.spacing() * self.grid.spacing();
        let denom = self.rho_sum * h2;
        let dx = (momentum_before[0] - momentum_after[0]) / denom;
        let dy = (momentum_before[1] - momentum_after[1]) / denom;
        for v in out.x.iter_mut() {
            *v += dx;
        }
        for v in out.y.iter_mut() {
            *v += dy;
        }
        sv.x.modes[0] += num_complex::Complex64::new(dx * self.grid.len() as f64, 0.0);
        sv.y.modes[0] += num_complex::Complex64::new(dy * self.grid.len() as f64, 0.0);
        (out, [ell[0] + dx, ell[1] + dy], r)
    }

    /// Project a sampled field: Leray, rigid-core correction, momentum
    /// compensation. Returns the projected field and the rigid components
    /// of its interior.
    pub fn project(&self, v: &VectorField) -> Result<(VectorField, [f64; 2], f64)> {
        v.check_finite("rigid_project input")?;
        if v.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut sv = SpectralVec::forward(v);
        let (out, ell, r) = self.project_spectral(&mut sv);
        Ok((out, ell, r))
    }
}

/// Convenience wrapper matching the one-shot operation shape: build the
/// projector for this mask and apply it.
pub fn rigid_project(
    v: &VectorField,
    mask: &ScalarField,
    state: &SolidState,
    params: &SolidParams,
) -> Result<(VectorField, [f64; 2], f64)> {
    let proj = DiskProjector::new(mask, state, params.rho_s)?;
    proj.project(v)
}
