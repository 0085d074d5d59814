//! Lagrangian flow map, inverse deformation gradient `a`, Jacobian `J` and
//! reciprocal density `R` computed from a velocity track.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Rank, TimeTrack};
use crate::mat3::{self, Mat3, IDENTITY};
use crate::ops::{divergence, gradient};

/// `η(t, x) = x + d(t, x)`; only the displacement `d` is stored since `x` is
/// not periodic in-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowMap {
    pub displacement: TimeTrack,
}

impl FlowMap {
    /// Positions `η(t_n, x)` at sample `n`.
    pub fn positions(&self, n: usize) -> Field {
        let d = &self.displacement.samples[n];
        let mut out = Field::vector_from_fn(d.grid, |y| y);
        out.axpy(1.0, d);
        out
    }

    /// `∇η = I + ∇d` at every sample.
    pub fn deformation_gradient(&self) -> Result<TimeTrack> {
        self.displacement.try_map(|d| {
            let mut g = gradient(d)?;
            let n = g.npts();
            for c in [0, 4, 8] {
                g.data[c * n..(c + 1) * n].iter_mut().for_each(|x| *x += 1.0);
            }
            Ok(g)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicTrack {
    pub eta: FlowMap,
    pub a: TimeTrack,
    pub b: TimeTrack,
    pub j: TimeTrack,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// `max_t ‖a ∇η − I‖_∞`
    pub inverse_residual: f64,
    /// `max_t ‖J − det ∇η‖_∞`
    pub jacobian_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Floors {
    pub j_floor: f64,
    /// Density floor relative to `min R0`.
    pub r_rel_floor: f64,
}

impl Default for Floors {
    fn default() -> Self {
        Floors { j_floor: 0.1, r_rel_floor: 1e-3 }
    }
}

fn require_velocity(v: &TimeTrack) -> Result<()> {
    if v.rank() != Rank::Vector {
        return Err(FsiError::Shape("velocity track must hold vector fields".into()));
    }
    if !v.grid().domain.is_fluid() {
        return Err(FsiError::DomainMismatch { domain: v.grid().domain, what: "a velocity track".into() });
    }
    Ok(())
}

pub fn flow_map(v: &TimeTrack) -> Result<FlowMap> {
    require_velocity(v)?;
    Ok(FlowMap { displacement: v.cumulative_integral() })
}

/// `∇v` at every sample.
pub fn velocity_gradients(v: &TimeTrack) -> Result<TimeTrack> {
    require_velocity(v)?;
    let samples = v.samples.par_iter().map(gradient).collect::<Result<Vec<_>>>()?;
    TimeTrack::new(v.dt, samples)
}

fn riccati(a: &Mat3, g: &Mat3) -> Mat3 {
    mat3::scale(&mat3::mul(&mat3::mul(a, g), a), -1.0)
}

/// Per-point history of tensor samples, in parallel over points.
fn per_point<T: Send>(npts: usize, f: impl Fn(usize) -> Vec<T> + Sync + Send) -> Vec<Vec<T>> {
    (0..npts).into_par_iter().map(f).collect()
}

fn scatter_tensors(template: &Field, dt: f64, hist: Vec<Vec<Mat3>>) -> Result<TimeTrack> {
    let steps = hist[0].len();
    let mut samples = vec![Field::zeros(template.grid, Rank::Tensor); steps];
    for (p, h) in hist.iter().enumerate() {
        for (n, m) in h.iter().enumerate() {
            samples[n].set_matrix(p, m);
        }
    }
    TimeTrack::new(dt, samples)
}

/// RK4 for `a' = −a ∇v a`, `a(0) = I`, with `∇v` linear between samples.
pub fn inverse_gradient_from(grads: &TimeTrack) -> Result<TimeTrack> {
    let dt = grads.dt;
    let npts = grads.first().npts();
    let hist = per_point(npts, |p| {
        let mut a = IDENTITY;
        let mut out = Vec::with_capacity(grads.len());
        out.push(a);
        for w in grads.samples.windows(2) {
            let g0 = w[0].matrix_at(p);
            let g1 = w[1].matrix_at(p);
            let gm = mat3::lin(0.5, &g0, 0.5, &g1);
            let k1 = riccati(&a, &g0);
            let k2 = riccati(&mat3::lin(1.0, &a, 0.5 * dt, &k1), &gm);
            let k3 = riccati(&mat3::lin(1.0, &a, 0.5 * dt, &k2), &gm);
            let k4 = riccati(&mat3::lin(1.0, &a, dt, &k3), &g1);
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
                }
            }
            out.push(a);
        }
        out
    });
    scatter_tensors(grads.first(), dt, hist)
}

pub fn integrate_inverse_gradient(v: &TimeTrack) -> Result<TimeTrack> {
    inverse_gradient_from(&velocity_gradients(v)?)
}

/// RK4 for `J' = J a_{kj} ∂_k v_j`, `J(0) = 1`. Between samples `∇v` is
/// linear and `a` is the cubic Hermite interpolant built from `a' = −a ∇v a`.
pub fn jacobian_from(grads: &TimeTrack, a: &TimeTrack) -> Result<TimeTrack> {
    grads.check_compatible(a)?;
    let dt = grads.dt;
    let npts = grads.first().npts();
    let hist = per_point(npts, |p| {
        let mut jac = 1.0;
        let mut out = Vec::with_capacity(grads.len());
        out.push(jac);
        for n in 0..grads.steps() {
            let g0 = grads.samples[n].matrix_at(p);
            let g1 = grads.samples[n + 1].matrix_at(p);
            let a0 = a.samples[n].matrix_at(p);
            let a1 = a.samples[n + 1].matrix_at(p);
            let gm = mat3::lin(0.5, &g0, 0.5, &g1);
            let slope = mat3::sub(&riccati(&a0, &g0), &riccati(&a1, &g1));
            let am = mat3::lin(1.0, &mat3::lin(0.5, &a0, 0.5, &a1), dt / 8.0, &slope);
            let c0 = mat3::trace_mul(&a0, &g0);
            let cm = mat3::trace_mul(&am, &gm);
            let c1 = mat3::trace_mul(&a1, &g1);
            let k1 = c0 * jac;
            let k2 = cm * (jac + 0.5 * dt * k1);
            let k3 = cm * (jac + 0.5 * dt * k2);
            let k4 = c1 * (jac + dt * k3);
            jac += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            out.push(jac);
        }
        out
    });
    let grid = grads.grid();
    let steps = grads.len();
    let mut samples = vec![Field::zeros(grid, Rank::Scalar); steps];
    for (p, h) in hist.iter().enumerate() {
        for (n, x) in h.iter().enumerate() {
            samples[n].data[p] = *x;
        }
    }
    TimeTrack::new(dt, samples)
}

pub fn integrate_jacobian(v: &TimeTrack, a: &TimeTrack) -> Result<TimeTrack> {
    jacobian_from(&velocity_gradients(v)?, a)
}

/// `R = R0 exp(∫₀ᵗ div v)` without `a` (Λ-mode), or
/// `R = R0 exp(∫₀ᵗ a_{kj} ∂_k v_j)` with `a` (Π-mode).
pub fn density_closed_form(r0: &Field, v: &TimeTrack, a: Option<&TimeTrack>) -> Result<TimeTrack> {
    require_velocity(v)?;
    if r0.rank != Rank::Scalar || r0.grid != v.grid() {
        return Err(FsiError::Shape("R0 must be a scalar field on the velocity grid".into()));
    }
    let min = r0.min();
    if !(min > 0.0) {
        return Err(FsiError::InvalidDensity { min });
    }
    let rate = match a {
        None => v.try_map(divergence)?,
        Some(a) => {
            v.check_compatible(a)?;
            let grads = velocity_gradients(v)?;
            let samples = grads
                .samples
                .par_iter()
                .zip(&a.samples)
                .map(|(g, a)| {
                    Field::from_data(
                        g.grid,
                        Rank::Scalar,
                        (0..g.npts()).map(|p| mat3::trace_mul(&a.matrix_at(p), &g.matrix_at(p))).collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            TimeTrack::new(v.dt, samples)?
        }
    };
    let integral = rate.cumulative_integral();
    Ok(integral.map(|e| {
        let mut r = r0.clone();
        for (x, y) in r.data.iter_mut().zip(&e.data) {
            *x *= y.exp();
        }
        r
    }))
}

/// Full Π-mode kinematics of a velocity track.
pub fn kinematics(v: &TimeTrack) -> Result<KinematicTrack> {
    let grads = velocity_gradients(v)?;
    let a = inverse_gradient_from(&grads)?;
    let j = jacobian_from(&grads, &a)?;
    let b = a.map(|x| {
        let mut b = x.clone();
        let n = b.npts();
        for c in [0, 4, 8] {
            b.data[c * n..(c + 1) * n].iter_mut().for_each(|x| *x -= 1.0);
        }
        b
    });
    Ok(KinematicTrack { eta: flow_map(v)?, a, b, j })
}

pub fn kinematic_consistency(eta: &FlowMap, a: &TimeTrack, j: &TimeTrack) -> Result<ConsistencyReport> {
    let f = eta.deformation_gradient()?;
    f.check_compatible(a)?;
    f.check_compatible(j)?;
    let mut report = ConsistencyReport { inverse_residual: 0.0, jacobian_residual: 0.0 };
    for ((fs, as_), js) in f.samples.iter().zip(&a.samples).zip(&j.samples) {
        for p in 0..fs.npts() {
            let fm = fs.matrix_at(p);
            let r = mat3::max_abs(&mat3::sub(&mat3::mul(&as_.matrix_at(p), &fm), &IDENTITY));
            report.inverse_residual = report.inverse_residual.max(r);
            report.jacobian_residual = report.jacobian_residual.max((js.data[p] - mat3::det(&fm)).abs());
        }
    }
    Ok(report)
}

/// Abort if `min J < j_floor` or `min R < r_rel_floor · min R0`.
pub fn check_floors(j: Option<&TimeTrack>, r: &TimeTrack, r0_min: f64, floors: &Floors) -> Result<()> {
    if let Some(j) = j {
        let min = j.samples.iter().map(Field::min).fold(f64::INFINITY, f64::min);
        if min < floors.j_floor {
            return Err(FsiError::FloorBreach { quantity: "J", value: min, floor: floors.j_floor });
        }
    }
    let min = r.samples.iter().map(Field::min).fold(f64::INFINITY, f64::min);
    let floor = floors.r_rel_floor * r0_min;
    if !(min >= floor) {
        return Err(FsiError::FloorBreach { quantity: "R", value: min, floor });
    }
    Ok(())
}
