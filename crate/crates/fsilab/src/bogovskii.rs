//! Divergence solver on the reference annulus `1/2 <= |y| <= 1` with zero
//! boundary values, and the corrected cutoff test functions built from it.
//!
//! The solver expands in Fourier modes over the angle and, per mode,
//! minimizes an H1-type quadratic form subject to the discrete divergence
//! constraint at radial midpoints and homogeneous boundary rows. The KKT
//! factorizations are computed once per grid and shared.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField, VectorField};
use crate::solid::smoothstep;

/// Polar grid over the reference annulus `A = B(0,1) \ B(0,1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnulusGrid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl AnnulusGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 16 {
            return Err(Error::GridParam(format!("annulus needs n_r >= 16, got {n_r}")));
        }
        if n_theta < 32 || n_theta % 2 != 0 {
            return Err(Error::GridParam(format!(
                "annulus needs even n_theta >= 32, got {n_theta}"
            )));
        }
        Ok(AnnulusGrid { n_r, n_theta })
    }

    pub fn dr(&self) -> f64 {
        0.5 / (self.n_r - 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        0.5 + self.dr() * i as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn idx(&self, i_r: usize, j_th: usize) -> usize {
        i_r * self.n_theta + j_th
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }
}

/// Scalar samples on the annulus grid (radius-major layout).
#[derive(Debug, Clone)]
pub struct PolarScalar {
    pub grid: AnnulusGrid,
    pub data: Vec<f64>,
}

impl PolarScalar {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        PolarScalar { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: AnnulusGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = vec![0.0; grid.len()];
        for i in 0..grid.n_r {
            let r = grid.radius(i);
            for j in 0..grid.n_theta {
                data[grid.idx(i, j)] = f(r, grid.angle(j));
            }
        }
        PolarScalar { grid, data }
    }

    /// `int_A f dA` by trapezoid in r (midpoint-consistent) and exact in theta.
    pub fn integral(&self) -> f64 {
        let g = self.grid;
        let dth = 2.0 * PI / g.n_theta as f64;
        let dr = g.dr();
        let mut s = 0.0;
        for i in 0..g.n_r {
            let w = if i == 0 || i == g.n_r - 1 { 0.5 } else { 1.0 };
            let r = g.radius(i);
            for j in 0..g.n_theta {
                s += w * r * self.data[g.idx(i, j)];
            }
        }
        s * dr * dth
    }

    pub fn l2_norm(&self) -> f64 {
        let g = self.grid;
        let dth = 2.0 * PI / g.n_theta as f64;
        let dr = g.dr();
        let mut s = 0.0;
        for i in 0..g.n_r {
            let w = if i == 0 || i == g.n_r - 1 { 0.5 } else { 1.0 };
            let r = g.radius(i);
            for j in 0..g.n_theta {
                let v = self.data[g.idx(i, j)];
                s += w * r * v * v;
            }
        }
        (s * dr * dth).sqrt()
    }
}

/// Vector samples `(g_r, g_theta)` on the annulus grid.
#[derive(Debug, Clone)]
pub struct PolarVector {
    pub grid: AnnulusGrid,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
}

impl PolarVector {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        PolarVector { grid, r: vec![0.0; grid.len()], theta: vec![0.0; grid.len()] }
    }

    /// Max magnitude on the two boundary circles.
    pub fn boundary_max(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0f64;
        for j in 0..g.n_theta {
            for i in [0, g.n_r - 1] {
                let k = g.idx(i, j);
                m = m.max((self.r[k] * self.r[k] + self.theta[k] * self.theta[k]).sqrt());
            }
        }
        m
    }

    pub fn l2_norm(&self) -> f64 {
        let g = self.grid;
        let dth = 2.0 * PI / g.n_theta as f64;
        let dr = g.dr();
        let mut s = 0.0;
        for i in 0..g.n_r {
            let w = if i == 0 || i == g.n_r - 1 { 0.5 } else { 1.0 };
            let r = g.radius(i);
            for j in 0..g.n_theta {
                let k = g.idx(i, j);
                s += w * r * (self.r[k] * self.r[k] + self.theta[k] * self.theta[k]);
            }
        }
        (s * dr * dth).sqrt()
    }

    /// H1 norm with finite-difference radial and spectral angular pieces.
    pub fn h1_norm(&self) -> f64 {
        let g = self.grid;
        let dth = 2.0 * PI / g.n_theta as f64;
        let dr = g.dr();
        let mut s = 0.0;
        for i in 0..g.n_r {
            let w = if i == 0 || i == g.n_r - 1 { 0.5 } else { 1.0 };
            let r = g.radius(i);
            for j in 0..g.n_theta {
                let jm = (j + g.n_theta - 1) % g.n_theta;
                let jp = (j + 1) % g.n_theta;
                let k = g.idx(i, j);
                let (im, ip) = (i.saturating_sub(1), (i + 1).min(g.n_r - 1));
                let denom = (ip - im) as f64 * dr;
                let dr_r = (self.r[g.idx(ip, j)] - self.r[g.idx(im, j)]) / denom;
                let dr_t = (self.theta[g.idx(ip, j)] - self.theta[g.idx(im, j)]) / denom;
                let dt_r = (self.r[g.idx(i, jp)] - self.r[g.idx(i, jm)]) / (2.0 * dth);
                let dt_t = (self.theta[g.idx(i, jp)] - self.theta[g.idx(i, jm)]) / (2.0 * dth);
                let val = self.r[k] * self.r[k]
                    + self.theta[k] * self.theta[k]
                    + dr_r * dr_r
                    + dr_t * dr_t
                    + (dt_r * dt_r + dt_t * dt_t) / (r * r);
                s += w * r * val;
            }
        }
        (s * dr * dth).sqrt()
    }
}

/// Midpoint discrete divergence `(1/r)(r g_r)_r + (1/r) g_theta_theta`
/// sampled at radial midpoints (the solver's constraint operator).
pub fn midpoint_divergence(g: &PolarVector) -> Vec<f64> {
    let gr = g.grid;
    let dr = gr.dr();
    let dth = 2.0 * PI / gr.n_theta as f64;
    let mut out = vec![0.0; (gr.n_r - 1) * gr.n_theta];
    for i in 0..gr.n_r - 1 {
        let rmid = 0.5 * (gr.radius(i) + gr.radius(i + 1));
        for j in 0..gr.n_theta {
            let jm = (j + gr.n_theta - 1) % gr.n_theta;
            let jp = (j + 1) % gr.n_theta;
            let radial = (gr.radius(i + 1) * g.r[gr.idx(i + 1, j)]
                - gr.radius(i) * g.r[gr.idx(i, j)])
                / (rmid * dr);
            let ang = 0.5
                * ((g.theta[gr.idx(i, jp)] - g.theta[gr.idx(i, jm)])
                    + (g.theta[gr.idx(i + 1, jp)] - g.theta[gr.idx(i + 1, jm)]))
                / (2.0 * dth)
                / rmid;
            out[i * gr.n_theta + j] = radial + ang;
        }
    }
    out
}

/// Report from one divergence solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub residual: f64,
    pub boundary_max: f64,
    pub h1_over_l2: f64,
}

/// Factorized solver for `div g = f`, `g = 0` on both circles.
pub struct AnnulusSolver {
    grid: AnnulusGrid,
    factors: Vec<Arc<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>>>,
}

impl AnnulusSolver {
    pub fn new(grid: AnnulusGrid) -> Result<Self> {
        let n_int = grid.n_r - 2;
        let n_mid = grid.n_r - 1;
        let dr = grid.dr();
        let mut factors = Vec::with_capacity(grid.n_theta / 2 + 1);
        for m in 0..=grid.n_theta / 2 {
            let mf = m as f64;
            let dim = 2 * n_int + n_mid;
            let mut kkt = DMatrix::<Complex64>::zeros(dim, dim);
            // H block: (m^2+1)/r^2 mass plus radial FD stiffness from the
            // first differences over the n_r-1 intervals (boundary values are
            // zero so only interior entries appear), per component
            for comp in 0..2usize {
                for a in 0..n_int {
                    let ra = grid.radius(a + 1);
                    let ia = comp * n_int + a;
                    kkt[(ia, ia)] += Complex64::new(((mf * mf + 1.0) / (ra * ra)) * ra * dr, 0.0);
                }
            }
            for s in 0..grid.n_r - 1 {
                let rmid = 0.5 * (grid.radius(s) + grid.radius(s + 1));
                let w = rmid / dr;
                // difference g_{s+1} - g_s, map node index -> interior index
                let lo = s as isize - 1;
                let hi = s as isize;
                for (na, ca) in [(lo, -1.0), (hi, 1.0)] {
                    if na < 0 || na >= n_int as isize {
                        continue;
                    }
                    for (nb, cb) in [(lo, -1.0), (hi, 1.0)] {
                        if nb < 0 || nb >= n_int as isize {
                            continue;
                        }
                        for comp in 0..2usize {
                            let ia = comp * n_int + na as usize;
                            let ib = comp * n_int + nb as usize;
                            kkt[(ia, ib)] += Complex64::new(ca * cb * w, 0.0);
                        }
                    }
                }
            }
            // B block: midpoint divergence rows
            for s in 0..n_mid {
                let rmid = 0.5 * (grid.radius(s) + grid.radius(s + 1));
                let row = 2 * n_int + s;
                for (node, sign) in [(s as isize, -1.0), (s as isize + 1, 1.0)] {
                    let ni = node - 1;
                    if ni < 0 || ni >= n_int as isize {
                        continue;
                    }
                    let col = ni as usize;
                    let val = Complex64::new(sign * grid.radius(node as usize) / (rmid * dr), 0.0);
                    kkt[(row, col)] += val;
                    kkt[(col, row)] += val.conj();
                }
                // angular part: i m / rmid * average of the two nodes
                for node in [s as isize, s as isize + 1] {
                    let ni = node - 1;
                    if ni < 0 || ni >= n_int as isize {
                        continue;
                    }
                    let col = n_int + ni as usize;
                    let val = Complex64::new(0.0, mf / rmid * 0.5);
                    kkt[(row, col)] += val;
                    kkt[(col, row)] += val.conj();
                }
                // tiny regularization keeps the KKT nonsingular when the
                // constraint rows carry the telescoping dependency (m = 0)
                kkt[(row, row)] = Complex64::new(-1e-12, 0.0);
            }
            factors.push(Arc::new(kkt.lu()));
        }
        Ok(AnnulusSolver { grid, factors })
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.grid
    }

    /// Solve `div g = f` with `g` vanishing on both circles.
    ///
    /// `f` must integrate to zero over the annulus (relative to its L2 size);
    /// this is the solvability condition and violations are a hard error.
    pub fn solve(&self, f: &PolarScalar) -> Result<(PolarVector, SolveReport)> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let g = self.grid;
        let l2 = f.l2_norm();
        let area = PI * (1.0 - 0.25);
        let rel = f.integral().abs() / (l2 * area.sqrt()).max(1e-300);
        if l2 > 0.0 && rel > 1e-8 {
            return Err(Error::MeanZero { relative: rel });
        }
        if l2 == 0.0 {
            return Ok((
                PolarVector::zeros(g),
                SolveReport { residual: 0.0, boundary_max: 0.0, h1_over_l2: 0.0 },
            ));
        }
        // angular FFT of f at every radius
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(g.n_theta);
        let mut fhat = vec![Complex64::new(0.0, 0.0); g.len()];
        for i in 0..g.n_r {
            let mut row: Vec<Complex64> = (0..g.n_theta)
                .map(|j| Complex64::new(f.data[g.idx(i, j)], 0.0))
                .collect();
            fft.process(&mut row);
            for j in 0..g.n_theta {
                fhat[g.idx(i, j)] = row[j] / g.n_theta as f64;
            }
        }
        let n_int = g.n_r - 2;
        let n_mid = g.n_r - 1;
        let dr = g.dr();
        // per-mode solves for m = 0..n_theta/2; negative modes by conjugation
        let mut ghat_r = vec![Complex64::new(0.0, 0.0); g.len()];
        let mut ghat_t = vec![Complex64::new(0.0, 0.0); g.len()];
        for m in 0..=g.n_theta / 2 {
            let dim = 2 * n_int + n_mid;
            let mut rhs = DVector::<Complex64>::zeros(dim);
            let mut fm: Vec<Complex64> =
                (0..g.n_r).map(|i| fhat[g.idx(i, m)]).collect();
            if m == 0 {
                // project out the residual weighted mean so the telescoping
                // row dependency is consistent
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = 0.0;
                for s in 0..n_mid {
                    let rmid = 0.5 * (g.radius(s) + g.radius(s + 1));
                    num += rmid * 0.5 * (fm[s] + fm[s + 1]);
                    den += rmid;
                }
                let shift = num / den;
                for v in fm.iter_mut() {
                    *v -= shift;
                }
            }
            for s in 0..n_mid {
                rhs[2 * n_int + s] = 0.5 * (fm[s] + fm[s + 1]);
            }
            let sol = self.factors[m]
                .solve(&rhs)
                .ok_or_else(|| Error::Config("annulus KKT solve failed".into()))?;
            for a in 0..n_int {
                ghat_r[g.idx(a + 1, m)] = sol[a];
                ghat_t[g.idx(a + 1, m)] = sol[n_int + a];
            }
            if m != 0 && m != g.n_theta / 2 {
                let mc = g.n_theta - m;
                for a in 0..n_int {
                    ghat_r[g.idx(a + 1, mc)] = sol[a].conj();
                    ghat_t[g.idx(a + 1, mc)] = sol[n_int + a].conj();
                }
            }
        }
        // inverse FFT back to angle samples
        let ifft = planner.plan_fft_inverse(g.n_theta);
        let mut out = PolarVector::zeros(g);
        for i in 1..g.n_r - 1 {
            let mut row_r: Vec<Complex64> =
                (0..g.n_theta).map(|j| ghat_r[g.idx(i, j)]).collect();
            let mut row_t: Vec<Complex64> =
                (0..g.n_theta).map(|j| ghat_t[g.idx(i, j)]).collect();
            ifft.process(&mut row_r);
            ifft.process(&mut row_t);
            for j in 0..g.n_theta {
                out.r[g.idx(i, j)] = row_r[j].re;
                out.theta[g.idx(i, j)] = row_t[j].re;
            }
        }
        // report
        let div = midpoint_divergence(&out);
        let mut res = 0.0f64;
        for i in 0..g.n_r - 1 {
            for j in 0..g.n_theta {
                let fm = 0.5 * (f.data[g.idx(i, j)] + f.data[g.idx(i + 1, j)]);
                res = res.max((div[i * g.n_theta + j] - fm).abs());
            }
        }
        // the m=0 compat shift is part of the residual scale
        let report = SolveReport {
            residual: res / l2.max(1e-300),
            boundary_max: out.boundary_max(),
            h1_over_l2: out.h1_norm() / l2,
        };
        Ok((out, report))
    }
}

/// The proof's cutoff: 0 on `B(0,1/2)`, 1 off `B(0,1)`, C-infinity ramp.
pub fn chi(y: f64) -> f64 {
    smoothstep(2.0 * (y - 0.5))
}

/// Radial derivative of [`chi`].
pub fn chi_prime(y: f64) -> f64 {
    let s = 2.0 * (y - 0.5);
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let fa = (-1.0 / s).exp();
    let fb = (-1.0 / (1.0 - s)).exp();
    let da = fa / (s * s);
    let db = fb / ((1.0 - s) * (1.0 - s));
    // d/ds [fa/(fa+fb)] = (da*fb + fa*db)/(fa+fb)^2
    2.0 * (da * fb + fa * db) / ((fa + fb) * (fa + fb))
}

/// One time sample of the corrected test function family.
#[derive(Debug, Clone)]
pub struct TestFunctionSample {
    pub t: f64,
    pub h: [f64; 2],
    /// phi^eta on the Cartesian grid.
    pub field: VectorField,
    /// The annulus corrector for this time.
    pub g_tilde: PolarVector,
    pub report: SolveReport,
}

/// Build `phi^eta(t,x) = phi(t,x) chi((x-h(t))/eta) - g((x-h(t))/eta)` for
/// every sampled time. `phi` must be solenoidal; `eta >= 4` grid spacings.
pub fn build_test_function(
    phi: &[(f64, VectorField)],
    h_path: &[(f64, [f64; 2])],
    eta: f64,
    solver: &AnnulusSolver,
) -> Result<Vec<TestFunctionSample>> {
    if phi.is_empty() {
        return Err(Error::EmptySeries);
    }
    let grid = phi[0].1.grid;
    if eta < 4.0 * grid.spacing() {
        return Err(Error::UnderResolved { need: 4.0 * grid.spacing(), got: eta });
    }
    let ag = solver.grid();
    let mut out = Vec::with_capacity(phi.len());
    for (t, phi_t) in phi {
        let h = interp_path(h_path, *t);
        // phi~ (y) = phi(eta y + h) . grad chi(y) on the annulus
        let mut ftil = PolarScalar::zeros(ag);
        for i in 0..ag.n_r {
            let r = ag.radius(i);
            let cp = chi_prime(r);
            for j in 0..ag.n_theta {
                let th = ag.angle(j);
                let y = [r * th.cos(), r * th.sin()];
                let p = grid.wrap([h[0] + eta * y[0], h[1] + eta * y[1]]);
                let v = phi_t.interp(p);
                ftil.data[ag.idx(i, j)] = cp * (v[0] * th.cos() + v[1] * th.sin());
            }
        }
        // the proof's mean-zero identity must hold before every solve
        let scale = phi_t.max_abs().max(1e-300) * PI * 0.75;
        let rel = ftil.integral().abs() / scale;
        if rel > 1e-6 {
            return Err(Error::MeanZero { relative: rel });
        }
        let (g_tilde, report) = solver.solve(&ftil)?;
        // assemble phi^eta on the Cartesian grid
        let radial = RadialInterp::new(&g_tilde);
        let n = grid.n();
        let mut fx = vec![0.0; grid.len()];
        let mut fy = vec![0.0; grid.len()];
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                let dx = grid.min_image(grid.coord(ix) - h[0]);
                let dy = grid.min_image(grid.coord(iy) - h[1]);
                let rr = (dx * dx + dy * dy).sqrt() / eta;
                let c = chi(rr);
                fx[i] = phi_t.x[i] * c;
                fy[i] = phi_t.y[i] * c;
                if rr > 0.5 && rr < 1.0 {
                    let th = dy.atan2(dx);
                    let (gr, gt) = radial.eval(rr, th);
                    fx[i] -= gr * th.cos() - gt * th.sin();
                    fy[i] -= gr * th.sin() + gt * th.cos();
                }
            }
        }
        out.push(TestFunctionSample {
            t: *t,
            h,
            field: VectorField { grid, x: fx, y: fy },
            g_tilde,
            report,
        });
    }
    Ok(out)
}

fn interp_path(path: &[(f64, [f64; 2])], t: f64) -> [f64; 2] {
    if path.is_empty() {
        return [0.0, 0.0];
    }
    if t <= path[0].0 {
        return path[0].1;
    }
    for w in path.windows(2) {
        if t <= w[1].0 {
            let a = (t - w[0].0) / (w[1].0 - w[0].0);
            return [
                w[0].1[0] + a * (w[1].1[0] - w[0].1[0]),
                w[0].1[1] + a * (w[1].1[1] - w[0].1[1]),
            ];
        }
    }
    path.last().unwrap().1
}

/// Fourier-in-angle, cubic-spline-in-radius evaluator for a polar field.
struct RadialInterp {
    grid: AnnulusGrid,
    // per angular mode, spline of the complex radial profile
    modes_r: Vec<(Spline, Spline)>,
    modes_t: Vec<(Spline, Spline)>,
}

impl RadialInterp {
    fn new(g: &PolarVector) -> Self {
        let gr = g.grid;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(gr.n_theta);
        let rs: Vec<f64> = (0..gr.n_r).map(|i| gr.radius(i)).collect();
        let mut modes_r = Vec::new();
        let mut modes_t = Vec::new();
        let mhalf = gr.n_theta / 2;
        let mut hat_r = vec![vec![Complex64::new(0.0, 0.0); gr.n_r]; mhalf + 1];
        let mut hat_t = vec![vec![Complex64::new(0.0, 0.0); gr.n_r]; mhalf + 1];
        for i in 0..gr.n_r {
            let mut row_r: Vec<Complex64> = (0..gr.n_theta)
                .map(|j| Complex64::new(g.r[gr.idx(i, j)], 0.0))
                .collect();
            let mut row_t: Vec<Complex64> = (0..gr.n_theta)
                .map(|j| Complex64::new(g.theta[gr.idx(i, j)], 0.0))
                .collect();
            fft.process(&mut row_r);
            fft.process(&mut row_t);
            for m in 0..=mhalf {
                hat_r[m][i] = row_r[m] / gr.n_theta as f64;
                hat_t[m][i] = row_t[m] / gr.n_theta as f64;
            }
        }
        for m in 0..=mhalf {
            let re_r: Vec<f64> = hat_r[m].iter().map(|c| c.re).collect();
            let im_r: Vec<f64> = hat_r[m].iter().map(|c| c.im).collect();
            let re_t: Vec<f64> = hat_t[m].iter().map(|c| c.re).collect();
            let im_t: Vec<f64> = hat_t[m].iter().map(|c| c.im).collect();
            modes_r.push((Spline::new(&rs, &re_r), Spline::new(&rs, &im_r)));
            modes_t.push((Spline::new(&rs, &re_t), Spline::new(&rs, &im_t)));
        }
        RadialInterp { grid: gr, modes_r, modes_t }
    }

    fn eval(&self, r: f64, th: f64) -> (f64, f64) {
        let mhalf = self.grid.n_theta / 2;
        let mut vr = 0.0;
        let mut vt = 0.0;
        for m in 0..=mhalf {
            let (sr, si) = (&self.modes_r[m], &self.modes_t[m]);
            let cr = Complex64::new(sr.0.eval(r), sr.1.eval(r));
            let ct = Complex64::new(si.0.eval(r), si.1.eval(r));
            let phase = Complex64::new(0.0, m as f64 * th).exp();
            let w = if m == 0 || m == mhalf { 1.0 } else { 2.0 };
            vr += w * (cr * phase).re;
            vt += w * (ct * phase).re;
        }
        (vr, vt)
    }
}

/// Natural cubic spline on a uniform knot vector.
struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m2: Vec<f64>,
}

impl Spline {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        let mut m2 = vec![0.0; n];
        if n > 2 {
            let h = xs[1] - xs[0];
            // tridiagonal solve for second derivatives (natural ends)
            let mut diag = vec![4.0; n - 2];
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (ys[i + 1] - 2.0 * ys[i] + ys[i - 1]) / (h * h))
                .collect();
            for i in 1..n - 2 {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; n - 2];
            sol[n - 3] = rhs[n - 3] / diag[n - 3];
            for i in (0..n - 3).rev() {
                sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
            }
            m2[1..n - 1].copy_from_slice(&sol);
        }
        Spline { xs: xs.to_vec(), ys: ys.to_vec(), m2 }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let h = self.xs[1] - self.xs[0];
        let pos = ((x - self.xs[0]) / h).floor();
        let i = (pos.max(0.0) as usize).min(n - 2);
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m2[i] + (b * b * b - b) * self.m2[i + 1]) * h * h / 6.0
    }
}

/// One row of the uniformity report for the eta sweep.
#[derive(Debug, Clone)]
pub struct EtaReportRow {
    pub eta: f64,
    /// `(1/eta) sup_t ||g^eta||_{L2(R^2)}` which equals `sup_t ||g~||_{L2(A)}`.
    pub scaled_l2: f64,
    /// `sup_t ||grad g^eta||_{L2(R^2)}` which equals `sup_t ||grad g~||_{L2(A)}`.
    pub grad_l2: f64,
    /// `sup_t ||phi^eta - phi||_{L2}` on the Cartesian grid.
    pub distance_l2: f64,
}

/// Sweep over `eta_list` (descending) and tabulate the scaled corrector
/// norms of the uniform bound together with the distance to `phi`.
pub fn verify_bogovskii_bounds(
    phi: &[(f64, VectorField)],
    h_path: &[(f64, [f64; 2])],
    eta_list: &[f64],
    solver: &AnnulusSolver,
) -> Result<(Vec<EtaReportRow>, bool)> {
    let mut rows = Vec::new();
    for w in eta_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config("eta list must be descending".into()));
        }
    }
    for &eta in eta_list {
        let samples = build_test_function(phi, h_path, eta, solver)?;
        let mut scaled_l2 = 0.0f64;
        let mut grad_l2 = 0.0f64;
        let mut dist = 0.0f64;
        for (s, (_, phi_t)) in samples.iter().zip(phi) {
            scaled_l2 = scaled_l2.max(s.g_tilde.l2_norm());
            // subtract the L2 part from the reported H1 to isolate the gradient
            let h1 = s.g_tilde.h1_norm();
            let l2 = s.g_tilde.l2_norm();
            grad_l2 = grad_l2.max((h1 * h1 - l2 * l2).max(0.0).sqrt());
            dist = dist.max(s.field.l2_distance(phi_t));
        }
        rows.push(EtaReportRow { eta, scaled_l2, grad_l2, distance_l2: dist });
    }
    let sums: Vec<f64> = rows.iter().map(|r| r.scaled_l2 + r.grad_l2).collect();
    let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().cloned().fold(0.0f64, f64::max);
    let uniform = lo > 0.0 && hi <= 3.0 * lo || hi == 0.0;
    Ok((rows, uniform))
}
