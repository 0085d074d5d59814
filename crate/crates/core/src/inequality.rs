//! Numerical checks of the space-time trace inequality, the symbol
//! interpolation inequality and hidden-regularity trace bounds for the wave
//! equation.
//!
//! Ratios are measured with discrete norms and reported with implicit
//! constant 1. A ratio that grows against earlier runs points to drift in the
//! implementation, not to a counterexample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Pair, TimeTrack};
use crate::geometry::{ChannelGeometry, Domain, SlabGrid};
use crate::norms::{l2_time_hs, pair_l2_time_hs, pair_mixed_norm, pair_spacetime_norm, sobolev_norm, spacetime_norm, SpaceTimeOrder};
use crate::ops::boundary_trace;
use crate::wave::{run_wave, WaveRun};

/// Attached to every lab report.
pub const DRIFT_NOTE: &str =
    "discrete norms approximate the continuum spaces; a ratio above earlier runs signals implementation drift, not a counterexample";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub tau: f64,
    pub xi: [f64; 3],
}

impl FrequencyPoint {
    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Exponents of the trace inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub r: f64,
    pub theta: f64,
}

impl TraceParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.5) || !r.is_finite() {
            return Err(FsiError::InvalidParameter(format!("trace inequality needs r > 1/2, got {r}")));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(FsiError::InvalidParameter(format!("trace inequality needs theta >= 0, got {theta}")));
        }
        Ok(TraceParams { r, theta })
    }

    /// Time order `2θr / (2r − 1)` of the second right-hand norm.
    pub fn time_order(&self) -> f64 {
        2.0 * self.theta * self.r / (2.0 * self.r - 1.0)
    }
}

/// Exponents of the symbol inequality
/// `(1 + τ^{2θ})(1 + ξ^{2λ}) ≤ ε² (1 + τ^{2α}) + C_ε (1 + ξ^{2β})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub lambda: f64,
    pub eps: f64,
}

impl SymbolParams {
    pub fn new(alpha: f64, beta: f64, theta: f64, lambda: f64, eps: f64) -> Result<Self> {
        let bad = |m: String| Err(FsiError::InvalidParameter(m));
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return bad(format!("alpha and beta must be positive, got ({alpha}, {beta})"));
        }
        if !(theta > 0.0 && theta < alpha) {
            return bad(format!("theta must lie in (0, alpha), got {theta}"));
        }
        if !(lambda > 0.0 && lambda < beta) {
            return bad(format!("lambda must lie in (0, beta), got {lambda}"));
        }
        if theta / alpha + lambda / beta > 1.0 + 1e-12 {
            return bad(format!("theta/alpha + lambda/beta must not exceed 1, got {}", theta / alpha + lambda / beta));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {eps}"));
        }
        Ok(SymbolParams { alpha, beta, theta, lambda, eps })
    }

    pub fn lhs(&self, tau: f64, xi: f64) -> f64 {
        (1.0 + tau.powf(2.0 * self.theta)) * (1.0 + xi.powf(2.0 * self.lambda))
    }

    /// Right side with constant `c`.
    pub fn rhs(&self, tau: f64, xi: f64, c: f64) -> f64 {
        self.eps * self.eps * (1.0 + tau.powf(2.0 * self.alpha)) + c * (1.0 + xi.powf(2.0 * self.beta))
    }
}

/// Both parameter groups of the lab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    pub trace: TraceParams,
    pub symbol: SymbolParams,
}

/// Parameter tuples every symbol check is run on.
pub fn shipped_symbol_matrix() -> Vec<SymbolParams> {
    [
        (1.0, 1.0, 0.5, 0.5, 0.5),
        (1.0, 1.0, 0.25, 0.25, 0.5),
        (2.0, 1.0, 0.5, 0.5, 0.1),
        (1.5, 2.5, 0.5, 1.0, 0.3),
        (1.0, 2.0, 0.5, 1.0, 0.2),
        (0.75, 1.25, 0.3, 0.6, 0.7),
        (3.0, 1.0, 1.0, 0.5, 0.05),
        (1.25, 2.25, 0.625, 1.125, 0.9),
    ]
    .into_iter()
    .map(|(a, b, t, l, e)| SymbolParams::new(a, b, t, l, e).expect("shipped tuple"))
    .collect()
}

/// One row of a lab suite: `(test-id, params, LHS, RHS, ratio)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabRecord {
    pub test_id: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when the right side vanishes.
    pub ratio: Option<f64>,
}

impl LabRecord {
    fn new(test_id: String, params: String, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 { Some(lhs / rhs) } else { None };
        LabRecord { test_id, params, lhs, rhs, ratio }
    }

    pub fn is_skip(&self) -> bool {
        self.ratio.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub records: Vec<LabRecord>,
    pub max_ratio: Option<f64>,
    pub skipped: usize,
}

impl SuiteSummary {
    pub fn from_records(records: Vec<LabRecord>) -> Self {
        let max_ratio = records.iter().filter_map(|r| r.ratio).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        let skipped = records.iter().filter(|r| r.is_skip()).count();
        SuiteSummary { records, max_ratio, skipped }
    }
}

/// The three norms of the trace inequality with its two sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    /// `‖u‖_{H^θ_t L²(Γc)}`
    pub lhs: f64,
    /// `‖u‖_{L²_t H^r}`
    pub space_norm: f64,
    /// `‖u‖_{H^{2θr/(2r−1)}_t L²}`
    pub time_norm: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

/// LHS / RHS of
/// `‖u‖_{H^θ L²(Γc)} ≤ ‖u‖^{1/2r}_{L²H^r} ‖u‖^{(2r−1)/2r}_{H^{2θr/(2r−1)}L²} + ‖u‖_{L²H^r}`.
pub fn verify_trace_inequality(u: &TimeTrack, params: TraceParams) -> Result<TraceReport> {
    let params = TraceParams::new(params.r, params.theta)?;
    let g = u.grid();
    if !g.domain.is_fluid() {
        return Err(FsiError::DomainMismatch { domain: g.domain, what: "the trace inequality".into() });
    }
    let gamma = if g.domain == Domain::FluidLower { Domain::InterfaceLower } else { Domain::InterfaceUpper };
    let trace = u.try_map(|f| boundary_trace(f, gamma))?;
    let lhs = spacetime_norm(&trace, SpaceTimeOrder::new(params.theta, 0.0)?)?;
    let a = l2_time_hs(u, params.r)?;
    let b = spacetime_norm(u, SpaceTimeOrder::new(params.time_order(), 0.0)?)?;
    let p = 1.0 / (2.0 * params.r);
    let rhs = a.powf(p) * b.powf(1.0 - p) + a;
    let ratio = if rhs > 0.0 { Some(lhs / rhs) } else { None };
    Ok(TraceReport { lhs, space_norm: a, time_norm: b, rhs, ratio })
}

/// `Σ a cos(k·y + φ) cos(m π ζ) cos(ω t + φ_t)` with `ζ` the relative height
/// in the slab, `|k_i| ≤ 2`, `m ≤ 2` and `ω ∈ {0, 2π/T, 4π/T}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandLimited {
    pub terms: Vec<BandTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandTerm {
    pub amp: f64,
    pub k: [f64; 2],
    pub phase: f64,
    pub m: f64,
    pub omega_index: f64,
    pub time_phase: f64,
}

impl BandLimited {
    pub fn random(rng: &mut ChaCha8Rng, terms: usize) -> Self {
        let terms = (0..terms)
            .map(|_| BandTerm {
                amp: rng.gen_range(-1.0..1.0),
                k: [rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64],
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
                m: rng.gen_range(0..=2) as f64,
                omega_index: rng.gen_range(0..=2) as f64,
                time_phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        BandLimited { terms }
    }

    /// Scalar value at `(t, y)` on a slab of height range `(z0, z1)` and window `T`.
    pub fn eval(&self, t: f64, y: [f64; 3], z0: f64, z1: f64, window: f64) -> f64 {
        let zeta = (y[2] - z0) / (z1 - z0);
        self.terms
            .iter()
            .map(|b| {
                let omega = std::f64::consts::TAU * b.omega_index / window;
                b.amp
                    * (b.k[0] * y[0] + b.k[1] * y[1] + b.phase).cos()
                    * (b.m * std::f64::consts::PI * zeta).cos()
                    * (omega * t + b.time_phase).cos()
            })
            .sum()
    }

    /// Scalar track on `grid` with `steps` steps over `window`.
    pub fn track(&self, grid: SlabGrid, window: f64, steps: usize) -> Result<TimeTrack> {
        let dt = window / steps as f64;
        TimeTrack::from_fn(dt, steps, |t| Field::scalar_from_fn(grid, |y| self.eval(t, y, grid.z0, grid.z1, window)))
    }
}

/// Random band-limited tracks on `grid`, one record per track.
pub fn trace_suite(grid: SlabGrid, window: f64, steps: usize, count: usize, seed: u64, params: TraceParams) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs: Vec<BandLimited> = (0..count).map(|_| BandLimited::random(&mut rng, 3)).collect();
    let label = format!("r={} theta={} grid={}x{}x{} steps={}", params.r, params.theta, grid.n1, grid.n2, grid.nz, steps);
    let records = funcs
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<LabRecord> {
            let rep = verify_trace_inequality(&f.track(grid, window, steps)?, params)?;
            Ok(LabRecord::new(format!("trace-{i:03}"), label.clone(), rep.lhs, rep.rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary::from_records(records))
}

/// Number of points per axis of the fitting grid (besides the origin).
pub const FIT_POINTS: usize = 1000;
pub const LOG_MIN: f64 = -3.0;
pub const LOG_MAX: f64 = 6.0;
pub const SAFETY: f64 = 1.05;

/// `{0} ∪ 10^{LOG_MIN..LOG_MAX}` with `FIT_POINTS` log-spaced points.
pub fn fitting_axis() -> Vec<f64> {
    let step = (LOG_MAX - LOG_MIN) / (FIT_POINTS - 1) as f64;
    std::iter::once(0.0).chain((0..FIT_POINTS).map(|i| 10f64.powf(LOG_MIN + step * i as f64))).collect()
}

/// `n` log-spaced points at midpoints of a uniform partition of the exponent
/// range, which never coincide with the fitting axis.
pub fn held_out_axis(n: usize) -> Vec<f64> {
    let step = (LOG_MAX - LOG_MIN) / n as f64;
    (0..n).map(|i| 10f64.powf(LOG_MIN + step * (i as f64 + 0.5))).collect()
}

/// `1.05 · max (LHS − ε²(1 + τ^{2α})) / (1 + ξ^{2β})` over the fitting grid.
pub fn interpolation_constant(params: SymbolParams) -> Result<f64> {
    let p = SymbolParams::new(params.alpha, params.beta, params.theta, params.lambda, params.eps)?;
    let axis = fitting_axis();
    let xi_terms: Vec<(f64, f64)> = axis.iter().map(|&x| (1.0 + x.powf(2.0 * p.lambda), 1.0 + x.powf(2.0 * p.beta))).collect();
    let best = axis
        .par_iter()
        .map(|&tau| {
            let a = 1.0 + tau.powf(2.0 * p.theta);
            let e = p.eps * p.eps * (1.0 + tau.powf(2.0 * p.alpha));
            xi_terms.iter().map(|(l, b)| (a * l - e) / b).fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(SAFETY * best.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheck {
    pub points: usize,
    pub violations: usize,
    /// `max LHS / RHS` over the checked points.
    pub worst_ratio: f64,
}

/// Count points of the held-out `grid_size × grid_size` grid where the
/// symbol inequality fails with constant `c`.
pub fn verify_symbol_inequality(params: SymbolParams, c: f64, grid_size: usize) -> SymbolCheck {
    let axis = held_out_axis(grid_size);
    let (violations, worst) = axis
        .par_iter()
        .map(|&tau| {
            let mut v = 0;
            let mut w = 0.0_f64;
            for &xi in &axis {
                let (l, r) = (params.lhs(tau, xi), params.rhs(tau, xi, c));
                if l > r {
                    v += 1;
                }
                w = w.max(l / r);
            }
            (v, w)
        })
        .reduce(|| (0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    SymbolCheck { points: grid_size * grid_size, violations, worst_ratio: worst }
}

/// Fitted constant and held-out check for every tuple, plus the halved
/// constant as a negative control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolRow {
    pub params: SymbolParams,
    pub c_eps: f64,
    pub check: SymbolCheck,
    pub halved: SymbolCheck,
}

pub fn symbol_suite(matrix: &[SymbolParams], grid_size: usize) -> Result<Vec<SymbolRow>> {
    matrix
        .iter()
        .map(|&p| {
            let c = interpolation_constant(p)?;
            Ok(SymbolRow {
                params: p,
                c_eps: c,
                check: verify_symbol_inequality(p, c, grid_size),
                halved: verify_symbol_inequality(p, 0.5 * c, grid_size),
            })
        })
        .collect()
}

/// Which trace bound a hidden-regularity ratio measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenForm {
    /// `‖∂w/∂ν‖_{H^{β−1}((0,T)×Γc)}` against
    /// `‖w0‖_{H^β} + ‖w1‖_{H^{β−1}} + ‖ψ‖_{H^β((0,T)×Γc)}`, `β ≥ 1`.
    SpaceTime,
    /// `‖∂w/∂ν‖_{L²_t H^{β+1}(Γc)}` against `‖w0‖_{H^{β+2}} + ‖w1‖_{H^{β+1}}
    /// + ‖ψ‖_{L²_t H^{β+2}(Γc)} + ‖ψ‖_{H^{β/2+1}_t H^{β/2+1}(Γc)}`, `0 < β < 5/2`.
    L2Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

pub fn hidden_regularity_ratio(run: &WaveRun, beta: f64, form: HiddenForm) -> Result<HiddenReport> {
    if run.states.len() < 4 {
        return Err(FsiError::Shape("hidden-regularity ratio needs at least 4 samples".into()));
    }
    let (lhs, rhs) = match form {
        HiddenForm::SpaceTime => {
            if !(beta >= 1.0) || !beta.is_finite() {
                return Err(FsiError::InvalidParameter(format!("space-time form needs beta >= 1, got {beta}")));
            }
            let lhs = pair_spacetime_norm(&run.dwdn, SpaceTimeOrder::new(beta - 1.0, beta - 1.0)?)?;
            let rhs = sobolev_norm(&run.w0, beta)?
                + sobolev_norm(&run.w1, beta - 1.0)?
                + pair_spacetime_norm(&run.psi, SpaceTimeOrder::new(beta, beta)?)?;
            (lhs, rhs)
        }
        HiddenForm::L2Time => {
            if !(beta > 0.0 && beta < 2.5) {
                return Err(FsiError::InvalidParameter(format!("L2-time form needs 0 < beta < 5/2, got {beta}")));
            }
            let lhs = pair_l2_time_hs(&run.dwdn, beta + 1.0)?;
            let h = 0.5 * beta + 1.0;
            let rhs = sobolev_norm(&run.w0, beta + 2.0)?
                + sobolev_norm(&run.w1, beta + 1.0)?
                + pair_l2_time_hs(&run.psi, beta + 2.0)?
                + pair_mixed_norm(&run.psi, h, h)?;
            (lhs, rhs)
        }
    };
    let ratio = if rhs > 0.0 { Some(lhs / rhs) } else { None };
    Ok(HiddenReport { lhs, rhs, ratio })
}

/// Random wave data with `w0 = 0` on Γc, `ψ(0) = 0` and `∂tψ(0) = w1` on Γc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveData {
    /// `(amp, k1, k2, phase, m, component)` interior modes of `w0`.
    pub w0_modes: Vec<[f64; 6]>,
    pub w1_modes: Vec<[f64; 6]>,
    /// Boundary modes `(amp, k1, k2, phase, omega, component)` per plane; the
    /// boundary data is `amp cos(k·y + phase) sin(ω t) / ω`.
    pub psi_modes: Pair<Vec<[f64; 6]>>,
}

impl WaveData {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut modes = |n: usize, vertical: bool| -> Vec<[f64; 6]> {
            (0..n)
                .map(|_| {
                    [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-2..=2) as f64,
                        rng.gen_range(-2..=2) as f64,
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        if vertical { rng.gen_range(1..=2) as f64 } else { rng.gen_range(1.0..4.0) },
                        rng.gen_range(0..3) as f64,
                    ]
                })
                .collect()
        };
        let w0_modes = modes(2, true);
        let w1_modes = modes(2, true);
        let psi_modes = Pair::new(modes(2, false), modes(2, false));
        WaveData { w0_modes, w1_modes, psi_modes }
    }

    fn planar(m: &[f64; 6], y: [f64; 3]) -> f64 {
        m[0] * (m[1] * y[0] + m[2] * y[1] + m[3]).cos()
    }

    fn interior(modes: &[[f64; 6]], y: [f64; 3], zeta: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for m in modes {
            out[m[5] as usize] += Self::planar(m, y) * (m[4] * std::f64::consts::PI * zeta).sin();
        }
        out
    }

    fn boundary(modes: &[[f64; 6]], t: f64, y: [f64; 3], deriv: bool) -> [f64; 3] {
        let mut out = [0.0; 3];
        for m in modes {
            let w = m[4];
            let time = if deriv { (w * t).cos() } else { (w * t).sin() / w };
            out[m[5] as usize] += Self::planar(m, y) * time;
        }
        out
    }

    /// Solve on the elastic slab of `geometry` with `steps` steps of `dt`.
    pub fn run(&self, geometry: &ChannelGeometry, dt: f64, steps: usize) -> Result<WaveRun> {
        let g = geometry.elastic();
        let (z0, z1) = (g.z0, g.z1);
        let zeta = |y: [f64; 3]| (y[2] - z0) / (z1 - z0);
        let w0 = Field::vector_from_fn(g, |y| Self::interior(&self.w0_modes, y, zeta(y)));
        let w1 = Field::vector_from_fn(g, |y| {
            let z = zeta(y);
            let lo = Self::boundary(&self.psi_modes.lower, 0.0, y, true);
            let up = Self::boundary(&self.psi_modes.upper, 0.0, y, true);
            let mut v = Self::interior(&self.w1_modes, y, z);
            for c in 0..3 {
                v[c] += (1.0 - z) * lo[c] + z * up[c];
            }
            v
        });
        let (pl, pu) = geometry.interface_planes();
        let psi = Pair::new(
            TimeTrack::from_fn(dt, steps, |t| Field::vector_from_fn(pl, |y| Self::boundary(&self.psi_modes.lower, t, y, false)))?,
            TimeTrack::from_fn(dt, steps, |t| Field::vector_from_fn(pu, |y| Self::boundary(&self.psi_modes.upper, t, y, false)))?,
        );
        run_wave(&w0, &w1, &psi)
    }
}

/// Random wave runs, one record per run.
#[allow(clippy::too_many_arguments)]
pub fn hidden_regularity_suite(
    geometry: &ChannelGeometry,
    dt: f64,
    steps: usize,
    count: usize,
    seed: u64,
    beta: f64,
    form: HiddenForm,
) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<WaveData> = (0..count).map(|_| WaveData::random(&mut rng)).collect();
    let label = format!("form={form:?} beta={beta} dt={dt} steps={steps}");
    let records = data
        .par_iter()
        .enumerate()
        .map(|(i, d)| -> Result<LabRecord> {
            let rep = hidden_regularity_ratio(&d.run(geometry, dt, steps)?, beta, form)?;
            Ok(LabRecord::new(format!("hidden-{i:03}"), label.clone(), rep.lhs, rep.rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary::from_records(records))
}

/// Symbol-check rows as lab records (`ratio` is the worst held-out ratio).
pub fn symbol_records(rows: &[SymbolRow]) -> Vec<LabRecord> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let p = r.params;
            LabRecord {
                test_id: format!("symbol-{i:02}"),
                params: format!(
                    "alpha={} beta={} theta={} lambda={} eps={} C={:.6e} violations={} halved_violations={}",
                    p.alpha, p.beta, p.theta, p.lambda, p.eps, r.c_eps, r.check.violations, r.halved.violations
                ),
                lhs: r.check.worst_ratio,
                rhs: 1.0,
                ratio: Some(r.check.worst_ratio),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;

    #[test]
    fn parameter_ranges() {
        assert!(TraceParams::new(0.5, 0.2).is_err());
        assert!(TraceParams::new(0.6, -0.1).is_err());
        assert!(SymbolParams::new(1.0, 1.0, 0.6, 0.5, 0.5).is_err());
        assert!(SymbolParams::new(1.0, 1.0, 0.5, 0.5, 0.0).is_err());
        assert!(SymbolParams::new(1.0, 1.0, 1.0, 0.5, 0.5).is_err());
        assert!(SymbolParams::new(1.0, 1.0, 0.5, 0.5, 1.0).is_ok());
    }

    #[test]
    fn origin_bounds_the_constant() {
        for eps in [0.1, 0.5, 1.0] {
            let p = SymbolParams::new(1.0, 2.0, 0.5, 0.5, eps).unwrap();
            assert!(interpolation_constant(p).unwrap() >= SAFETY * (1.0 - eps * eps) - 1e-15);
        }
    }

    #[test]
    fn held_out_axis_avoids_the_fitting_axis() {
        let fit = fitting_axis();
        for x in held_out_axis(100) {
            assert!(fit.iter().all(|f| (f - x).abs() > 1e-9 * x));
        }
    }

    #[test]
    fn huge_constant_never_violates() {
        let p = SymbolParams::new(1.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(verify_symbol_inequality(p, 1e9, 100).violations, 0);
    }

    #[test]
    fn zero_track_is_skipped() {
        let g = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap();
        let u = TimeTrack::constant(&Field::zeros(g.lower(), crate::field::Rank::Scalar), 0.1, 4).unwrap();
        let rep = verify_trace_inequality(&u, TraceParams::new(1.0, 0.5).unwrap()).unwrap();
        assert_eq!(rep.ratio, None);
        assert!(verify_trace_inequality(&u, TraceParams { r: 0.4, theta: 0.5 }).is_err());
    }
}
