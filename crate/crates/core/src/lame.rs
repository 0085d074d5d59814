//! Variable-coefficient parabolic Lamé system on one fluid slab:
//!
//! ```text
//! u_t − λR div(∇u + ∇uᵀ) − μR ∇div u = f
//! λ(∂_k u_j + ∂_j u_k)ν_k + μ div u ν_j = h   on Γc
//! u = 0                                       on Γf
//! ```
//!
//! In-plane directions are Fourier modes. Vertically the system is the
//! lumped-mass P1 form `∫ R⁻¹ u_t φ + a(u, φ) + ∫_Γc h·φ = ∫ R⁻¹ f·φ`, so
//! interior rows are the centred difference stencils and the interface row is
//! the half-cell traction balance. Each mode gives a block-tridiagonal system
//! with 3×3 blocks.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Rank, TimeTrack};
use crate::geometry::{Domain, SlabGrid};
use crate::linalg::{mat_vec, solve_block_tridiagonal, zero3, C3, V3};
use crate::mat3::Mat3;
use crate::norms::{grid_l2_norm, k_norm};
use crate::ops::{boundary_trace, gradient};
use crate::spectral::{field_to_modes, mode_wavenumbers, modes_to_field};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viscosities {
    pub lambda: f64,
    pub mu: f64,
}

impl Viscosities {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
            return Err(FsiError::InvalidParameter(format!("viscosities must be positive, got λ={lambda}, μ={mu}")));
        }
        Ok(Viscosities { lambda, mu })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeScheme {
    BackwardEuler,
    CrankNicolson,
}

/// Data of one slab solve over a window. `r`, `f` and `h` are sampled at the
/// same times; `h` lives on the slab's interface plane.
#[derive(Clone, Debug, PartialEq)]
pub struct LameProblem {
    pub r: TimeTrack,
    pub f: TimeTrack,
    pub h: TimeTrack,
    pub u0: Field,
    pub visc: Viscosities,
}

/// Interface and outer planes of a fluid slab.
pub fn slab_planes(grid: &SlabGrid) -> Result<(Domain, Domain)> {
    match grid.domain {
        Domain::FluidLower => Ok((Domain::InterfaceLower, Domain::OuterBottom)),
        Domain::FluidUpper => Ok((Domain::InterfaceUpper, Domain::OuterTop)),
        other => Err(FsiError::DomainMismatch { domain: other, what: "a Lamé solve".into() }),
    }
}

impl LameProblem {
    pub fn new(r: TimeTrack, f: TimeTrack, h: TimeTrack, u0: Field, visc: Viscosities) -> Result<Self> {
        let g = u0.grid;
        let (gamma, _) = slab_planes(&g)?;
        if u0.rank != Rank::Vector {
            return Err(FsiError::Shape("u0 must be a vector field".into()));
        }
        r.check_compatible(&f)?;
        r.check_compatible(&h)?;
        if r.grid() != g || r.rank() != Rank::Scalar {
            return Err(FsiError::Shape("R must be a scalar track on the slab grid".into()));
        }
        if f.grid() != g || f.rank() != Rank::Vector {
            return Err(FsiError::Shape("f must be a vector track on the slab grid".into()));
        }
        if h.grid().domain != gamma || h.grid().n1 != g.n1 || h.grid().n2 != g.n2 || h.rank() != Rank::Vector {
            return Err(FsiError::Shape(format!("h must be a vector track on {gamma:?}")));
        }
        let rmin = r.samples.iter().map(Field::min).fold(f64::INFINITY, f64::min);
        if !(rmin >= 1e-3) {
            return Err(FsiError::InvalidDensity { min: rmin });
        }
        Ok(LameProblem { r, f, h, u0, visc })
    }

    /// Zero forcing, zero interface data and constant `R`.
    pub fn homogeneous(u0: Field, r: f64, visc: Viscosities, dt: f64, steps: usize) -> Result<Self> {
        let g = u0.grid;
        let (gamma, _) = slab_planes(&g)?;
        let plane = g.plane_grid(gamma, g.level_of(gamma).expect("interface level"));
        LameProblem::new(
            TimeTrack::constant(&Field::constant(g, r), dt, steps)?,
            TimeTrack::constant(&Field::zeros(g, Rank::Vector), dt, steps)?,
            TimeTrack::constant(&Field::zeros(plane, Rank::Vector), dt, steps)?,
            u0,
            visc,
        )
    }

    pub fn dt(&self) -> f64 {
        self.r.dt
    }

    pub fn steps(&self) -> usize {
        self.r.steps()
    }
}

/// `B(Gφ, Gu) = λ Σ conj(Gφ_jk)(Gu_jk + Gu_kj) + μ conj(tr Gφ) tr Gu`.
fn kernel(visc: &Viscosities, gp: &C3, gu: &C3) -> Complex64 {
    let mut s = ZERO;
    for j in 0..3 {
        for k in 0..3 {
            s += gp[j][k].conj() * (gu[j][k] + gu[k][j]);
        }
    }
    let tp = gp[0][0] + gp[1][1] + gp[2][2];
    let tu = gu[0][0] + gu[1][1] + gu[2][2];
    s * visc.lambda + tp.conj() * tu * visc.mu
}

fn grad_z(n0: &V3, n1: &V3, h: f64) -> C3 {
    let mut g = zero3();
    for j in 0..3 {
        g[j][2] = (n1[j] - n0[j]) / h;
    }
    g
}

fn grad_ip(v: &V3, k1: f64, k2: f64) -> C3 {
    let mut g = zero3();
    for j in 0..3 {
        g[j][0] = I * k1 * v[j];
        g[j][1] = I * k2 * v[j];
    }
    g
}

/// Local 6×6 matrix of one cell, indexed `3 * node + component`.
fn cell_matrix(visc: &Viscosities, k1: f64, k2: f64, h: f64) -> [[Complex64; 6]; 6] {
    let unit = |idx: usize| -> (V3, V3) {
        let mut n = [[ZERO; 3]; 2];
        n[idx / 3][idx % 3] = Complex64::new(1.0, 0.0);
        (n[0], n[1])
    };
    let avg = |a: &V3, b: &V3| -> V3 { [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5, (a[2] + b[2]) * 0.5] };
    let mut m = [[ZERO; 6]; 6];
    for (row, mrow) in m.iter_mut().enumerate() {
        let (p0, p1) = unit(row);
        let gzp = grad_z(&p0, &p1, h);
        let gap = grad_ip(&avg(&p0, &p1), k1, k2);
        let g0p = grad_ip(&p0, k1, k2);
        let g1p = grad_ip(&p1, k1, k2);
        for (col, entry) in mrow.iter_mut().enumerate() {
            let (u0, u1) = unit(col);
            let gzu = grad_z(&u0, &u1, h);
            let gau = grad_ip(&avg(&u0, &u1), k1, k2);
            let v = kernel(visc, &gzp, &gzu)
                + kernel(visc, &gzp, &gau)
                + kernel(visc, &gap, &gzu)
                + (kernel(visc, &g0p, &grad_ip(&u0, k1, k2)) + kernel(visc, &g1p, &grad_ip(&u1, k1, k2))) * 0.5;
            *entry = v * h;
        }
    }
    m
}

fn sub_block(m: &[[Complex64; 6]; 6], r: usize, c: usize) -> C3 {
    let mut b = zero3();
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = m[3 * r + i][3 * c + j];
        }
    }
    b
}

fn add_block(a: &mut C3, b: &C3, s: f64) {
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] += b[i][j] * s;
        }
    }
}

/// Stiffness blocks of one in-plane mode.
#[derive(Clone, Debug)]
struct ModeBlocks {
    lower: Vec<C3>,
    diag: Vec<C3>,
    upper: Vec<C3>,
}

/// Discrete Lamé operator of one slab, assembled per in-plane mode.
#[derive(Clone, Debug)]
pub struct LameOperator {
    pub grid: SlabGrid,
    pub visc: Viscosities,
    gamma_level: usize,
    dirichlet_level: usize,
    modes: Vec<ModeBlocks>,
}

impl LameOperator {
    pub fn new(grid: SlabGrid, visc: Viscosities) -> Result<Self> {
        let (gamma, outer) = slab_planes(&grid)?;
        if grid.nz < 3 {
            return Err(FsiError::Shape("a slab needs at least 3 levels".into()));
        }
        let nz = grid.nz;
        let modes = mode_wavenumbers(grid.n1, grid.n2)
            .into_iter()
            .map(|(k1, k2)| {
                let cell = cell_matrix(&visc, k1, k2, grid.dz);
                let (b00, b01, b10, b11) =
                    (sub_block(&cell, 0, 0), sub_block(&cell, 0, 1), sub_block(&cell, 1, 0), sub_block(&cell, 1, 1));
                let mut diag = vec![zero3(); nz];
                let mut lower = vec![zero3(); nz];
                let mut upper = vec![zero3(); nz];
                for c in 0..nz - 1 {
                    add_block(&mut diag[c], &b00, 1.0);
                    add_block(&mut diag[c + 1], &b11, 1.0);
                    upper[c] = b01;
                    lower[c + 1] = b10;
                }
                ModeBlocks { lower, diag, upper }
            })
            .collect();
        Ok(LameOperator {
            grid,
            visc,
            gamma_level: grid.level_of(gamma).expect("interface level"),
            dirichlet_level: grid.level_of(outer).expect("outer level"),
            modes,
        })
    }

    /// Lumped mass weight of level `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.grid.z_weight(k)
    }

    /// Stiffness product `A û` of one mode (all rows, no Dirichlet handling).
    fn apply_mode(&self, q: usize, col: &[V3]) -> Vec<V3> {
        let b = &self.modes[q];
        let nz = col.len();
        (0..nz)
            .map(|k| {
                let mut y = mat_vec(&b.diag[k], &col[k]);
                if k > 0 {
                    let t = mat_vec(&b.lower[k], &col[k - 1]);
                    (0..3).for_each(|i| y[i] += t[i]);
                }
                if k + 1 < nz {
                    let t = mat_vec(&b.upper[k], &col[k + 1]);
                    (0..3).for_each(|i| y[i] += t[i]);
                }
                y
            })
            .collect()
    }

    /// `A u` in physical space (weak-form rows, per unit area).
    pub fn apply(&self, u: &Field) -> Result<Field> {
        let modes = field_to_modes(u);
        let (np, nz) = (self.grid.plane_len(), self.grid.nz);
        let mut out = vec![vec![ZERO; nz * np]; 3];
        for q in 0..np {
            let col: Vec<V3> = (0..nz).map(|k| [modes[0][k * np + q], modes[1][k * np + q], modes[2][k * np + q]]).collect();
            for (k, y) in self.apply_mode(q, &col).into_iter().enumerate() {
                for c in 0..3 {
                    out[c][k * np + q] = y[c];
                }
            }
        }
        modes_to_field(self.grid, out)
    }

    /// Strong-form operator `−(A u)_k / W_k`, i.e. the discrete
    /// `λ div(∇u + ∇uᵀ) + μ∇div u` on interior levels.
    pub fn strong_form(&self, u: &Field) -> Result<Field> {
        let mut a = self.apply(u)?;
        let np = self.grid.plane_len();
        let n = a.npts();
        for c in 0..3 {
            for k in 0..self.grid.nz {
                let w = -1.0 / self.weight(k);
                a.data[c * n + k * np..c * n + (k + 1) * np].iter_mut().for_each(|x| *x *= w);
            }
        }
        Ok(a)
    }

    /// Solve `(M_r / dt + θ A) x = rhs` per mode, with `M_r` the lumped mass
    /// weighted by the per-level coefficient `rbar` and identity Dirichlet rows.
    fn solve_modes(&self, rbar: &[f64], dt: f64, theta: f64, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let (np, nz) = (self.grid.plane_len(), self.grid.nz);
        let dl = self.dirichlet_level;
        let cols: Vec<Vec<V3>> = (0..np)
            .into_par_iter()
            .map(|q| {
                let b = &self.modes[q];
                let mut diag = b.diag.clone();
                let mut lower = b.lower.clone();
                let mut upper = b.upper.clone();
                for k in 0..nz {
                    for blk in [&mut diag[k], &mut lower[k], &mut upper[k]] {
                        for row in blk.iter_mut() {
                            for x in row.iter_mut() {
                                *x *= theta;
                            }
                        }
                    }
                    for i in 0..3 {
                        diag[k][i][i] += self.weight(k) * rbar[k] / dt;
                    }
                }
                diag[dl] = zero3();
                lower[dl] = zero3();
                upper[dl] = zero3();
                for i in 0..3 {
                    diag[dl][i][i] = Complex64::new(1.0, 0.0);
                }
                let mut x: Vec<V3> = (0..nz).map(|k| [rhs[0][k * np + q], rhs[1][k * np + q], rhs[2][k * np + q]]).collect();
                x[dl] = [ZERO; 3];
                solve_block_tridiagonal(&lower, &diag, &upper, &mut x)?;
                Ok(x)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![vec![ZERO; nz * np]; 3];
        for (q, col) in cols.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                for c in 0..3 {
                    out[c][k * np + q] = v[c];
                }
            }
        }
        Ok(out)
    }
}

fn level_means(f: &Field) -> Vec<f64> {
    let np = f.grid.plane_len();
    f.data.chunks_exact(np).take(f.grid.nz).map(|l| l.iter().sum::<f64>() / np as f64).collect()
}

/// Pointwise `W_k · s(x) · u(x)` for a scalar coefficient `s`.
fn weighted(op: &LameOperator, s: &Field, u: &Field) -> Field {
    let np = op.grid.plane_len();
    let n = u.npts();
    let mut out = u.clone();
    for c in 0..u.comps() {
        for k in 0..op.grid.nz {
            let w = op.weight(k);
            for p in 0..np {
                out.data[c * n + k * np + p] *= w * s.data[k * np + p];
            }
        }
    }
    out
}

fn add_to_level(f: &mut Field, k: usize, plane: &Field, s: f64) {
    let np = f.grid.plane_len();
    let n = f.npts();
    for c in 0..3 {
        for p in 0..np {
            f.data[c * n + k * np + p] += s * plane.data[c * np + p];
        }
    }
}

fn zero_level(f: &mut Field, k: usize) {
    let np = f.grid.plane_len();
    let n = f.npts();
    for c in 0..f.comps() {
        f.data[c * n + k * np..c * n + (k + 1) * np].iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Time-stepping solver for one slab.
#[derive(Clone, Debug)]
pub struct LameSolver {
    pub op: LameOperator,
    pub scheme: TimeScheme,
    /// Relative increment at which the variable-coefficient defect correction stops.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl LameSolver {
    pub fn new(grid: SlabGrid, visc: Viscosities, scheme: TimeScheme) -> Result<Self> {
        Ok(LameSolver { op: LameOperator::new(grid, visc)?, scheme, tol: 1e-13, max_sweeps: 200 })
    }

    /// Advance `u` (sample `n`) to sample `n + 1` of `prob`.
    pub fn step(&self, u: &Field, prob: &LameProblem, n: usize) -> Result<Field> {
        let op = &self.op;
        let dt = prob.dt();
        let rinv = prob.r.samples[n + 1].map(|x| 1.0 / x);
        let theta = match self.scheme {
            TimeScheme::BackwardEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        };
        let mut src = u.scaled(1.0 / dt);
        let mut h = prob.h.samples[n + 1].clone();
        match self.scheme {
            TimeScheme::BackwardEuler => src.axpy(1.0, &prob.f.samples[n + 1]),
            TimeScheme::CrankNicolson => {
                src.axpy(0.5, &prob.f.samples[n]);
                src.axpy(0.5, &prob.f.samples[n + 1]);
                h = (&h + &prob.h.samples[n]).scaled(0.5);
            }
        }
        let mut rhs = weighted(op, &rinv, &src);
        add_to_level(&mut rhs, op.gamma_level, &h, -1.0);
        if self.scheme == TimeScheme::CrankNicolson {
            rhs.axpy(-0.5, &op.apply(u)?);
        }
        zero_level(&mut rhs, op.dirichlet_level);
        let rbar = level_means(&rinv);
        let uniform = rinv.data.chunks_exact(op.grid.plane_len()).zip(&rbar).all(|(l, m)| l.iter().all(|x| x == m));
        let rhs_modes = field_to_modes(&rhs);
        let mut x = modes_to_field(op.grid, op.solve_modes(&rbar, dt, theta, &rhs_modes)?)?;
        if !uniform {
            let scale = rhs.max_abs().max(f64::MIN_POSITIVE);
            let mut converged = false;
            for _ in 0..self.max_sweeps {
                let mut res = &rhs - &weighted(op, &rinv, &x.scaled(1.0 / dt));
                res.axpy(-theta, &op.apply(&x)?);
                zero_level(&mut res, op.dirichlet_level);
                let delta = modes_to_field(op.grid, op.solve_modes(&rbar, dt, theta, &field_to_modes(&res))?)?;
                x.axpy(1.0, &delta);
                if delta.max_abs() <= self.tol * x.max_abs().max(f64::MIN_POSITIVE) || res.max_abs() <= 1e-15 * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(FsiError::Solver("variable-coefficient defect correction did not converge".into()));
            }
        }
        zero_level(&mut x, op.dirichlet_level);
        Ok(x)
    }

    pub fn solve(&self, prob: &LameProblem) -> Result<TimeTrack> {
        if prob.u0.grid != self.op.grid {
            return Err(FsiError::Shape("problem and solver grids differ".into()));
        }
        let (_, outer) = slab_planes(&self.op.grid)?;
        let dirichlet = boundary_trace(&prob.u0, outer)?.max_abs();
        if dirichlet > 1e-12 {
            return Err(FsiError::InvalidParameter(format!("u0 violates u = 0 on Γf by {dirichlet:.3e}")));
        }
        let mut samples = Vec::with_capacity(prob.steps() + 1);
        let mut u = prob.u0.clone();
        samples.push(u.clone());
        for n in 0..prob.steps() {
            u = self.step(&u, prob, n)?;
            samples.push(u.clone());
        }
        TimeTrack::new(prob.dt(), samples)
    }
}

/// One backward-Euler step of `prob` from sample `n`.
pub fn step_lame(u: &Field, prob: &LameProblem, n: usize) -> Result<Field> {
    LameSolver::new(u.grid, prob.visc, TimeScheme::BackwardEuler)?.step(u, prob, n)
}

/// Analytic description of a manufactured velocity `u*(t, y)`.
pub trait ManufacturedSolution: Sync {
    fn value(&self, t: f64, y: [f64; 3]) -> [f64; 3];
    fn time_derivative(&self, t: f64, y: [f64; 3]) -> [f64; 3];
    /// `G[j][k] = ∂_k u_j`
    fn gradient(&self, t: f64, y: [f64; 3]) -> Mat3;
    /// `H[j][k][l] = ∂_k ∂_l u_j`
    fn hessian(&self, t: f64, y: [f64; 3]) -> [Mat3; 3];
}

/// Forcing `f = u*_t − λR div(∇u* + ∇u*ᵀ) − μR∇div u*` on the slab and
/// interface data `h = λ(∂_k u*_j + ∂_j u*_k)ν_k + μ div u* ν_j`, both from
/// exact derivatives of `u*`.
pub fn manufactured_forcing(
    u_star: &dyn ManufacturedSolution,
    grid: SlabGrid,
    r: &Field,
    visc: Viscosities,
    dt: f64,
    steps: usize,
) -> Result<(TimeTrack, TimeTrack)> {
    let (gamma, _) = slab_planes(&grid)?;
    let nu = gamma.interface_normal().expect("interface");
    let level = grid.level_of(gamma).expect("interface level");
    let plane = grid.plane_grid(gamma, level);
    let (lam, mu) = (visc.lambda, visc.mu);
    let f = TimeTrack::from_fn(dt, steps, |t| {
        let mut out = Field::zeros(grid, Rank::Vector);
        let n = grid.len();
        for (p, y) in grid.points().enumerate() {
            let ut = u_star.time_derivative(t, y);
            let hs = u_star.hessian(t, y);
            for j in 0..3 {
                let mut lap = 0.0;
                let mut grad_div = 0.0;
                for k in 0..3 {
                    lap += hs[j][k][k] + hs[k][j][k];
                    grad_div += hs[k][k][j];
                }
                out.data[j * n + p] = ut[j] - r.data[p] * (lam * lap + mu * grad_div);
            }
        }
        out
    })?;
    let h = TimeTrack::from_fn(dt, steps, |t| {
        Field::vector_from_fn(plane, |y| {
            let g = u_star.gradient(t, y);
            let div = g[0][0] + g[1][1] + g[2][2];
            let mut out = [0.0; 3];
            for (j, o) in out.iter_mut().enumerate() {
                *o = lam * (g[j][2] + g[2][j]) * nu;
            }
            out[2] += mu * div * nu;
            out
        })
    })?;
    Ok((f, h))
}

/// Sample a manufactured solution on a grid.
pub fn manufactured_track(u_star: &dyn ManufacturedSolution, grid: SlabGrid, dt: f64, steps: usize) -> Result<TimeTrack> {
    TimeTrack::from_fn(dt, steps, |t| Field::vector_from_fn(grid, |y| u_star.value(t, y)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeProfile {
    Constant,
    /// `1 + t`
    Linear,
    /// `e^{rate t}`
    Exp(f64),
    /// `sin(ω t) + 1`
    Sin(f64),
}

impl TimeProfile {
    fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            TimeProfile::Constant => (1.0, 0.0),
            TimeProfile::Linear => (1.0 + t, 1.0),
            TimeProfile::Exp(r) => ((r * t).exp(), r * (r * t).exp()),
            TimeProfile::Sin(w) => ((w * t).sin() + 1.0, w * (w * t).cos()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VerticalProfile {
    /// `Σ c_i z^i`
    Poly(Vec<f64>),
    /// `sin(freq (z − shift))`
    Sin { freq: f64, shift: f64 },
}

impl VerticalProfile {
    /// Value and first two derivatives.
    fn eval(&self, z: f64) -> [f64; 3] {
        match self {
            VerticalProfile::Poly(c) => {
                let mut out = [0.0; 3];
                for (i, &ci) in c.iter().enumerate() {
                    let i_f = i as f64;
                    out[0] += ci * z.powi(i as i32);
                    if i >= 1 {
                        out[1] += ci * i_f * z.powi(i as i32 - 1);
                    }
                    if i >= 2 {
                        out[2] += ci * i_f * (i_f - 1.0) * z.powi(i as i32 - 2);
                    }
                }
                out
            }
            VerticalProfile::Sin { freq, shift } => {
                let a = freq * (z - shift);
                [a.sin(), freq * a.cos(), -freq * freq * a.sin()]
            }
        }
    }
}

/// `cos(k1 y1 + k2 y2 + phase) · Z(y3)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub k1: f64,
    pub k2: f64,
    pub phase: f64,
    pub vertical: VerticalProfile,
}

/// `u*_j(t, y) = g(t) Σ_terms cos(k·y + phase) Z(y3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableSolution {
    pub time: TimeProfile,
    pub comps: [Vec<SeparableTerm>; 3],
}

impl SeparableSolution {
    /// Per component: value, gradient and Hessian of the spatial part.
    fn spatial(&self, y: [f64; 3]) -> ([f64; 3], Mat3, [Mat3; 3]) {
        let mut val = [0.0; 3];
        let mut grad = [[0.0; 3]; 3];
        let mut hess = [[[0.0; 3]; 3]; 3];
        for (j, terms) in self.comps.iter().enumerate() {
            for term in terms {
                let th = term.k1 * y[0] + term.k2 * y[1] + term.phase;
                let (c, s) = (th.cos(), th.sin());
                let [z0, z1, z2] = term.vertical.eval(y[2]);
                let k = [term.k1, term.k2];
                val[j] += c * z0;
                grad[j][0] += -k[0] * s * z0;
                grad[j][1] += -k[1] * s * z0;
                grad[j][2] += c * z1;
                for a in 0..2 {
                    for b in 0..2 {
                        hess[j][a][b] += -k[a] * k[b] * c * z0;
                    }
                    hess[j][a][2] += -k[a] * s * z1;
                    hess[j][2][a] += -k[a] * s * z1;
                }
                hess[j][2][2] += c * z2;
            }
        }
        (val, grad, hess)
    }
}

impl ManufacturedSolution for SeparableSolution {
    fn value(&self, t: f64, y: [f64; 3]) -> [f64; 3] {
        let g = self.time.eval(t).0;
        self.spatial(y).0.map(|x| g * x)
    }

    fn time_derivative(&self, t: f64, y: [f64; 3]) -> [f64; 3] {
        let dg = self.time.eval(t).1;
        self.spatial(y).0.map(|x| dg * x)
    }

    fn gradient(&self, t: f64, y: [f64; 3]) -> Mat3 {
        let g = self.time.eval(t).0;
        self.spatial(y).1.map(|r| r.map(|x| g * x))
    }

    fn hessian(&self, t: f64, y: [f64; 3]) -> [Mat3; 3] {
        let g = self.time.eval(t).0;
        self.spatial(y).2.map(|m| m.map(|r| r.map(|x| g * x)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameResidual {
    /// Interior PDE residual with the BDF1 time derivative.
    pub interior: f64,
    /// Interface half-cell traction balance residual.
    pub interface: f64,
    /// `u` on Γf.
    pub dirichlet: f64,
}

/// `L²`-in-time residual norms of a track against `prob` (samples `1..=N`).
pub fn lame_residual(u: &TimeTrack, prob: &LameProblem) -> Result<LameResidual> {
    u.check_compatible(&prob.r)?;
    let op = LameOperator::new(u.grid(), prob.visc)?;
    let (gamma, outer) = slab_planes(&op.grid)?;
    let (gl, dl) = (op.gamma_level, op.dirichlet_level);
    let dt = u.dt;
    let g = op.grid;
    let (np, nz) = (g.plane_len(), g.nz);
    let mut acc = [0.0; 3];
    for n in 1..u.len() {
        let un = &u.samples[n];
        let r = &prob.r.samples[n];
        let mut rate = (un - &u.samples[n - 1]).scaled(1.0 / dt);
        rate.axpy(-1.0, &prob.f.samples[n]);
        let a = op.apply(un)?;
        let npts = un.npts();
        let mut interior = Field::zeros(g, Rank::Vector);
        for c in 0..3 {
            for k in 0..nz {
                if k == gl || k == dl {
                    continue;
                }
                for p in 0..np {
                    let i = c * npts + k * np + p;
                    interior.data[i] = rate.data[i] + r.data[k * np + p] * a.data[i] / op.weight(k);
                }
            }
        }
        let w_gamma = op.weight(gl);
        let rinv = r.map(|x| 1.0 / x);
        let mut balance = boundary_trace(&weighted(&op, &rinv, &rate), gamma)?;
        balance.axpy(1.0, &boundary_trace(&a, gamma)?);
        balance.axpy(1.0, &prob.h.samples[n]);
        debug_assert!(w_gamma > 0.0);
        acc[0] += dt * grid_l2_norm(&interior).powi(2);
        acc[1] += dt * grid_l2_norm(&balance).powi(2);
        acc[2] += dt * grid_l2_norm(&boundary_trace(un, outer)?).powi(2);
    }
    Ok(LameResidual { interior: acc[0].sqrt(), interface: acc[1].sqrt(), dirichlet: acc[2].sqrt() })
}

/// `∫₀ᵀ ∫ R Σ (∂_k u_j + ∂_j u_k)²` by trapezoid quadrature.
pub fn symmetric_gradient_dissipation(u: &TimeTrack, r: &TimeTrack) -> Result<f64> {
    u.check_compatible(r)?;
    let per: Vec<f64> = u
        .samples
        .iter()
        .zip(&r.samples)
        .map(|(f, r)| -> Result<f64> {
            let g = gradient(f)?;
            let n = g.npts();
            let mut e = Field::zeros(f.grid, Rank::Scalar);
            for p in 0..n {
                let m = g.matrix_at(p);
                let mut s = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        s += (m[j][k] + m[k][j]).powi(2);
                    }
                }
                e.data[p] = (r.data[p] * s).sqrt();
            }
            Ok(grid_l2_norm(&e).powi(2))
        })
        .collect::<Result<_>>()?;
    let nn = per.len();
    Ok(u.dt * (per[1..nn - 1].iter().sum::<f64>() + 0.5 * (per[0] + per[nn - 1])))
}

/// `‖u‖_{K²} / ‖f‖_{K⁰}`, `None` when the forcing vanishes.
pub fn maximal_regularity_ratio(u: &TimeTrack, f: &TimeTrack) -> Result<Option<f64>> {
    let den = k_norm(f, 0.0)?;
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(k_norm(u, 2.0)? / den))
}
