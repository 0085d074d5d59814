//! Linear wave equation `w_tt − Δw = 0` on the elastic slab with Dirichlet
//! data on both interface planes. Each in-plane Fourier mode and component is
//! an independent 1D system advanced by the average-acceleration Newmark
//! scheme.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Pair, Rank, TimeTrack};
use crate::geometry::{Domain, SlabGrid};
use crate::linalg::solve_tridiagonal;
use crate::ops::{boundary_trace, d_plane_axis};
use crate::spectral::{field_to_modes, mode_wavenumbers, modes_to_field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticState {
    pub w: Field,
    pub w_t: Field,
    pub t: f64,
}

impl ElasticState {
    pub fn new(w: Field, w_t: Field, t: f64) -> Result<Self> {
        if w.grid.domain != Domain::Elastic || w.rank != Rank::Vector {
            return Err(FsiError::DomainMismatch { domain: w.grid.domain, what: "an elastic displacement".into() });
        }
        w.check_shape(&w_t)?;
        Ok(ElasticState { w, w_t, t })
    }
}

/// Everything needed to evaluate trace and data norms of one wave solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveRun {
    pub w0: Field,
    pub w1: Field,
    pub psi: Pair<TimeTrack>,
    pub states: Vec<ElasticState>,
    /// `∂w/∂ν` on both interface planes.
    pub dwdn: Pair<TimeTrack>,
    pub warnings: Vec<String>,
}

impl WaveRun {
    pub fn dt(&self) -> f64 {
        self.psi.lower.dt
    }

    pub fn displacement(&self) -> Result<TimeTrack> {
        TimeTrack::new(self.dt(), self.states.iter().map(|s| s.w.clone()).collect())
    }

    pub fn velocity(&self) -> Result<TimeTrack> {
        TimeTrack::new(self.dt(), self.states.iter().map(|s| s.w_t.clone()).collect())
    }
}

/// `ψ(t) = w0|Γc + ∫₀ᵗ v|Γc` on both interface planes.
pub fn dirichlet_from_velocity(w0_trace: &Pair<Field>, v: &Pair<TimeTrack>) -> Result<Pair<TimeTrack>> {
    v.lower.check_compatible(&v.upper)?;
    let planes = [Domain::InterfaceLower, Domain::InterfaceUpper];
    let mut out = Vec::with_capacity(2);
    for ((w0, track), plane) in w0_trace.iter().zip(v.iter()).zip(planes) {
        let tr = track.try_map(|f| boundary_trace(f, plane))?;
        if w0.grid != tr.grid() || w0.rank != tr.rank() {
            return Err(FsiError::Shape(format!("w0 trace on {plane:?} does not match the velocity trace")));
        }
        let int = tr.cumulative_integral();
        out.push(int.map(|x| x + w0));
    }
    let upper = out.pop().expect("two planes");
    let lower = out.pop().expect("two planes");
    Ok(Pair::new(lower, upper))
}

fn check_psi(grid: &SlabGrid, psi: &Pair<Field>) -> Result<()> {
    for (f, plane) in psi.iter().zip([Domain::InterfaceLower, Domain::InterfaceUpper]) {
        if f.grid.domain != plane || f.grid.n1 != grid.n1 || f.grid.n2 != grid.n2 || f.rank != Rank::Vector {
            return Err(FsiError::Shape(format!("Dirichlet data on {plane:?} has the wrong shape")));
        }
    }
    Ok(())
}

/// `(K ŵ)_k = (ŵ_{k+1} − 2ŵ_k + ŵ_{k−1}) / h² − |k_in|² ŵ_k` on interior levels.
fn apply_k(col: &[Complex64], kin2: f64, h: f64) -> Vec<Complex64> {
    let n = col.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n - 1 {
        out[k] = (col[k + 1] - col[k] * 2.0 + col[k - 1]) / (h * h) - col[k] * kin2;
    }
    out
}

fn set_level(f: &mut Field, k: usize, plane: &Field) {
    let np = f.grid.plane_len();
    let n = f.npts();
    for c in 0..3 {
        f.data[c * n + k * np..c * n + (k + 1) * np].copy_from_slice(plane.comp(c));
    }
}

/// One average-acceleration Newmark step with `ψ_next` imposed strongly.
pub fn step_wave(state: &ElasticState, psi_next: &Pair<Field>, dt: f64) -> Result<ElasticState> {
    if !(dt > 0.0) {
        return Err(FsiError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let g = state.w.grid;
    check_psi(&g, psi_next)?;
    let (np, nz, h) = (g.plane_len(), g.nz, g.dz);
    let top = nz - 1;
    let kin = mode_wavenumbers(g.n1, g.n2);
    let w_hat = field_to_modes(&state.w);
    let v_hat = field_to_modes(&state.w_t);
    let lo_hat = field_to_modes(&psi_next.lower);
    let up_hat = field_to_modes(&psi_next.upper);
    let c = dt * dt / 4.0;
    let mut w_new = vec![vec![Complex64::new(0.0, 0.0); nz * np]; 3];
    let mut v_new = vec![vec![Complex64::new(0.0, 0.0); nz * np]; 3];
    let mut col = vec![Complex64::new(0.0, 0.0); nz];
    let mut vel = vec![Complex64::new(0.0, 0.0); nz];
    for comp in 0..3 {
        for (q, &(k1, k2)) in kin.iter().enumerate() {
            let kin2 = k1 * k1 + k2 * k2;
            for k in 0..nz {
                col[k] = w_hat[comp][k * np + q];
                vel[k] = v_hat[comp][k * np + q];
            }
            let acc = apply_k(&col, kin2, h);
            let mut rhs: Vec<Complex64> = (0..nz).map(|k| col[k] + vel[k] * dt + acc[k] * c).collect();
            rhs[0] = lo_hat[comp][q];
            rhs[top] = up_hat[comp][q];
            let mut sub = vec![-c / (h * h); nz];
            let mut diag = vec![1.0 + c * (2.0 / (h * h) + kin2); nz];
            let mut sup = vec![-c / (h * h); nz];
            diag[0] = 1.0;
            sup[0] = 0.0;
            diag[top] = 1.0;
            sub[top] = 0.0;
            solve_tridiagonal(&sub, &diag, &sup, &mut rhs)?;
            let acc_new = apply_k(&rhs, kin2, h);
            for k in 0..nz {
                w_new[comp][k * np + q] = rhs[k];
                v_new[comp][k * np + q] = vel[k] + (acc[k] + acc_new[k]) * (0.5 * dt);
            }
        }
    }
    let mut w = modes_to_field(g, w_new)?;
    let mut w_t = modes_to_field(g, v_new)?;
    for (k, plane, psi) in [(0, Domain::InterfaceLower, &psi_next.lower), (top, Domain::InterfaceUpper, &psi_next.upper)] {
        let prev = boundary_trace(&state.w, plane)?;
        let vel = (psi - &prev).scaled(1.0 / dt);
        set_level(&mut w, k, psi);
        set_level(&mut w_t, k, &vel);
    }
    Ok(ElasticState { w, w_t, t: state.t + dt })
}

/// One-sided second-order `∂w/∂ν` with `ν = (0, 0, −1)` at `y3 = L1` and
/// `ν = (0, 0, +1)` at `y3 = L2`.
pub fn normal_derivative(state: &ElasticState) -> Result<Pair<Field>> {
    let g = state.w.grid;
    let (np, nz, n) = (g.plane_len(), g.nz, g.len());
    let w = &state.w.data;
    let mut lo = vec![0.0; 3 * np];
    let mut up = vec![0.0; 3 * np];
    let h2 = 2.0 * g.dz;
    for c in 0..3 {
        for p in 0..np {
            let at = |k: usize| w[c * n + k * np + p];
            lo[c * np + p] = -(-3.0 * at(0) + 4.0 * at(1) - at(2)) / h2;
            up[c * np + p] = (3.0 * at(nz - 1) - 4.0 * at(nz - 2) + at(nz - 3)) / h2;
        }
    }
    Ok(Pair::new(
        Field::from_data(g.plane_grid(Domain::InterfaceLower, 0), Rank::Vector, lo)?,
        Field::from_data(g.plane_grid(Domain::InterfaceUpper, nz - 1), Rank::Vector, up)?,
    ))
}

/// `½ ∫ |w_t|² + |∇w|²` with trapezoid weights for `|w_t|²` and the in-plane
/// gradient, and cell differences for `∂3 w`.
pub fn wave_energy(state: &ElasticState) -> f64 {
    let g = state.w.grid;
    let (np, nz, n) = (g.plane_len(), g.nz, g.len());
    let mut acc = 0.0;
    for c in 0..3 {
        let w = state.w.comp(c);
        let wt = state.w_t.comp(c);
        let d1 = d_plane_axis(&g, w, 0);
        let d2 = d_plane_axis(&g, w, 1);
        for k in 0..nz {
            let zw = g.z_weight(k);
            for p in 0..np {
                let i = k * np + p;
                acc += zw * (wt[i] * wt[i] + d1[i] * d1[i] + d2[i] * d2[i]);
            }
        }
        for k in 0..nz - 1 {
            for p in 0..np {
                let d = (w[(k + 1) * np + p] - w[k * np + p]) / g.dz;
                acc += g.dz * d * d;
            }
        }
    }
    debug_assert_eq!(n, nz * np);
    0.5 * acc * g.cell_area()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.data.iter().zip(&b.data).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Run the wave solver over the window of `psi` from `(w0, w1)`.
pub fn run_wave(w0: &Field, w1: &Field, psi: &Pair<TimeTrack>) -> Result<WaveRun> {
    let mut state = ElasticState::new(w0.clone(), w1.clone(), 0.0)?;
    psi.lower.check_compatible(&psi.upper)?;
    let g = w0.grid;
    check_psi(&g, &Pair::new(psi.lower.first().clone(), psi.upper.first().clone()))?;
    let dt = psi.lower.dt;
    let mut warnings = Vec::new();
    for (k, plane, track) in [(0, Domain::InterfaceLower, &psi.lower), (g.nz - 1, Domain::InterfaceUpper, &psi.upper)] {
        let w0_tr = boundary_trace(w0, plane)?;
        let gap = max_diff(&w0_tr, track.first());
        if gap > 1e-12 {
            warnings.push(format!("w0 differs from psi(0) on {plane:?} by {gap:.3e}; boundary rows overwritten"));
            set_level(&mut state.w, k, track.first());
        }
        let w1_tr = boundary_trace(w1, plane)?;
        let s = &track.samples;
        let (deriv, tol) = if s.len() >= 4 {
            let d = (&(&s[1].scaled(4.0) - &s[0].scaled(3.0)) - &s[2]).scaled(0.5 / dt);
            let third = &(&(&s[3] - &s[2].scaled(3.0)) + &s[1].scaled(3.0)) - &s[0];
            (d, 1e-8 + third.max_abs() / dt)
        } else {
            ((&s[1] - &s[0]).scaled(1.0 / dt), 1e-8 + (&s[1] - &s[0]).max_abs())
        };
        let mismatch = max_diff(&deriv, &w1_tr);
        if mismatch > tol {
            warnings.push(format!("d/dt psi(0) differs from w1 on {plane:?} by {mismatch:.3e}"));
        }
    }
    let mut states = Vec::with_capacity(psi.lower.len());
    let mut lo = Vec::with_capacity(psi.lower.len());
    let mut up = Vec::with_capacity(psi.lower.len());
    let push = |s: &ElasticState, lo: &mut Vec<Field>, up: &mut Vec<Field>| -> Result<()> {
        let d = normal_derivative(s)?;
        lo.push(d.lower);
        up.push(d.upper);
        Ok(())
    };
    push(&state, &mut lo, &mut up)?;
    states.push(state.clone());
    for n in 1..psi.lower.len() {
        let next = Pair::new(psi.lower.samples[n].clone(), psi.upper.samples[n].clone());
        state = step_wave(&state, &next, dt)?;
        push(&state, &mut lo, &mut up)?;
        states.push(state.clone());
    }
    Ok(WaveRun {
        w0: w0.clone(),
        w1: w1.clone(),
        psi: psi.clone(),
        states,
        dwdn: Pair::new(TimeTrack::new(dt, lo)?, TimeTrack::new(dt, up)?),
        warnings,
    })
}
