//! One application of Λ or Π, and the space-time Picard driver around it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compat::{check_compatibility, CompatThresholds, CompatibilityReport, InitialLoads};
use super::terms::{fixed_boundary_terms, fixed_interior_terms, sum_terms, velocity_interior_terms, boundary_terms, TermInputs, VELOCITY_K};
use crate::error::{FsiError, Result};
use crate::field::{Field, Pair, Rank, TimeTrack};
use crate::geometry::{ChannelGeometry, Domain, SlabGrid};
use crate::kinematics::{check_floors, density_closed_form, kinematics, Floors, KinematicTrack};
use crate::lame::{lame_residual, LameProblem, LameResidual, LameSolver, TimeScheme, Viscosities};
use crate::norms::{k_norm, pair_k_norm};
use crate::ops::boundary_trace;
use crate::wave::{dirichlet_from_velocity, run_wave, WaveRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fixed-coefficient parabolic-wave map.
    Lambda,
    /// Full map with Lagrangian variable coefficients.
    Pi,
}

/// Upper end of the admissible regularity window `(2, 2 + ε0]`.
pub const S_MAX: f64 = 2.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Regularity parameter; selects the diagnostic `K^{s+1}` norm.
    pub s: f64,
    pub t_final: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Ball radius reported against `‖v‖_{K^{s+1}}`.
    pub m_report: f64,
    pub floors: Floors,
    pub inner_max_sweeps: usize,
    pub scheme: TimeScheme,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            s: 2.25,
            t_final: 0.1,
            dt: 0.0125,
            tol: 1e-8,
            max_iter: 30,
            m_report: 10.0,
            floors: Floors::default(),
            inner_max_sweeps: 25,
            scheme: TimeScheme::BackwardEuler,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 2.0 && self.s < S_MAX) {
            return Err(FsiError::Config(format!("s must lie in (2, {S_MAX}), got {}", self.s)));
        }
        for (name, x) in [("T", self.t_final), ("dt", self.dt), ("tol", self.tol), ("M_report", self.m_report)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(FsiError::Config(format!("{name} must be positive, got {x}")));
            }
        }
        if self.max_iter == 0 || self.inner_max_sweeps == 0 {
            return Err(FsiError::Config("max_iter and inner_max_sweeps must be at least 1".into()));
        }
        self.steps().map(|_| ())
    }

    /// Number of time steps; `T` must be a whole number of `dt` and the
    /// window needs at least 4 samples.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(FsiError::Config(format!("T = {} is not a multiple of dt = {}", self.t_final, self.dt)));
        }
        if n < 3.0 {
            return Err(FsiError::Config(format!("window needs at least 3 steps, got {n}")));
        }
        Ok(n as usize)
    }

    pub fn diagnostic_order(&self) -> f64 {
        self.s + 1.0
    }

    /// The same number of steps over a window of length `t`.
    pub fn with_window(&self, t: f64) -> Result<Self> {
        let steps = self.steps()?;
        Ok(IterationConfig { t_final: t, dt: t / steps as f64, ..*self })
    }
}

/// Time-independent external loads: body force on each fluid slab and
/// interface load on each Γc plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalLoads {
    pub f: Pair<Field>,
    pub h: Pair<Field>,
}

impl ExternalLoads {
    pub fn zero(geometry: &ChannelGeometry) -> Self {
        ExternalLoads::uniform_interface(geometry, [0.0; 3], [0.0; 3])
    }

    /// No body force, constant interface loads.
    pub fn uniform_interface(geometry: &ChannelGeometry, lower: [f64; 3], upper: [f64; 3]) -> Self {
        let (pl, pu) = geometry.interface_planes();
        ExternalLoads {
            f: Pair::new(Field::zeros(geometry.lower(), Rank::Vector), Field::zeros(geometry.upper(), Rank::Vector)),
            h: Pair::new(Field::vector_from_fn(pl, |_| lower), Field::vector_from_fn(pu, |_| upper)),
        }
    }

    /// Interface loads `h = −R0⁻¹ ν` that cancel the pressure trace of a
    /// density constant on each interface.
    pub fn pressure_cancelling(geometry: &ChannelGeometry, r0: &Pair<Field>) -> Result<Self> {
        let mut loads = ExternalLoads::zero(geometry);
        for (h, (r, plane)) in [&mut loads.h.lower, &mut loads.h.upper]
            .into_iter()
            .zip([(&r0.lower, Domain::InterfaceLower), (&r0.upper, Domain::InterfaceUpper)])
        {
            let nu = plane.interface_normal().expect("interface");
            let rt = boundary_trace(r, plane)?;
            let np = rt.npts();
            for p in 0..np {
                h.data[2 * np + p] = -nu / rt.data[p];
            }
        }
        Ok(loads)
    }
}

/// Initial data and physical parameters of one coupled problem; `w0 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsiData {
    pub geometry: ChannelGeometry,
    pub visc: Viscosities,
    pub v0: Pair<Field>,
    pub r0: Pair<Field>,
    pub w0: Field,
    pub w1: Field,
    pub loads: ExternalLoads,
}

impl FsiData {
    pub fn new(
        geometry: ChannelGeometry,
        visc: Viscosities,
        v0: Pair<Field>,
        r0: Pair<Field>,
        w1: Field,
        loads: ExternalLoads,
    ) -> Result<Self> {
        let slabs = [geometry.lower(), geometry.upper()];
        for (name, pair, rank) in [("v0", &v0, Rank::Vector), ("R0", &r0, Rank::Scalar), ("f", &loads.f, Rank::Vector)] {
            for (f, g) in pair.iter().zip(slabs) {
                if f.grid != g || f.rank != rank {
                    return Err(FsiError::Shape(format!("{name} does not match the fluid slab grids")));
                }
            }
        }
        let (pl, pu) = geometry.interface_planes();
        for (h, g) in loads.h.iter().zip([pl, pu]) {
            if h.grid != g || h.rank != Rank::Vector {
                return Err(FsiError::Shape("h does not match the interface planes".into()));
            }
        }
        if w1.grid != geometry.elastic() || w1.rank != Rank::Vector {
            return Err(FsiError::Shape("w1 must be a vector field on the elastic slab".into()));
        }
        for r in r0.iter() {
            let min = r.min();
            if !(min > 0.0) {
                return Err(FsiError::InvalidDensity { min });
            }
        }
        let w0 = Field::zeros(geometry.elastic(), Rank::Vector);
        Ok(FsiData { geometry, visc, v0, r0, w0, w1, loads })
    }

    pub fn compatibility(&self, thresholds: CompatThresholds) -> Result<CompatibilityReport> {
        check_compatibility(
            &self.v0,
            &self.w1,
            &self.r0,
            self.visc,
            InitialLoads { f: Some(&self.loads.f), h: Some(&self.loads.h) },
            thresholds,
        )
    }

    /// `v⁰(t) ≡ v0`.
    pub fn initial_iterate(&self, cfg: &IterationConfig) -> Result<Pair<TimeTrack>> {
        let steps = cfg.steps()?;
        self.v0.try_map(|f| TimeTrack::constant(f, cfg.dt, steps))
    }
}

/// Result of one application of Λ or Π.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub vbar: Pair<TimeTrack>,
    pub r: Pair<TimeTrack>,
    pub kinematics: Option<Pair<KinematicTrack>>,
    pub wave: WaveRun,
    /// Parabolic problems of the last inner sweep.
    pub problems: Pair<LameProblem>,
    /// Inner-sweep differences in the diagnostic norm (empty for Λ).
    pub inner_diffs: Vec<f64>,
}

fn check_iterate(cfg: &IterationConfig, data: &FsiData, v: &Pair<TimeTrack>) -> Result<()> {
    let steps = cfg.steps()?;
    for (t, g) in v.iter().zip([data.geometry.lower(), data.geometry.upper()]) {
        if t.grid() != g || t.rank() != Rank::Vector {
            return Err(FsiError::Shape("velocity iterate does not match the fluid slab grids".into()));
        }
        if t.steps() != steps || (t.dt - cfg.dt).abs() > 1e-12 * cfg.dt {
            return Err(FsiError::Shape(format!("velocity iterate must have {steps} steps of dt = {}", cfg.dt)));
        }
    }
    Ok(())
}

fn wave_stage(data: &FsiData, v: &Pair<TimeTrack>) -> Result<WaveRun> {
    let w0 = Pair::new(
        boundary_trace(&data.w0, Domain::InterfaceLower)?,
        boundary_trace(&data.w0, Domain::InterfaceUpper)?,
    );
    let psi = dirichlet_from_velocity(&w0, v)?;
    run_wave(&data.w0, &data.w1, &psi)
}

/// Coefficients of one slab's parabolic problem.
struct SlabCoefficients<'a> {
    grid: SlabGrid,
    r: &'a TimeTrack,
    b: Option<&'a TimeTrack>,
    j: Option<&'a TimeTrack>,
    dwdn: &'a TimeTrack,
    v0: &'a Field,
    f_ext: &'a Field,
    h_ext: &'a Field,
}

struct SlabSolve {
    vbar: TimeTrack,
    problem: LameProblem,
    diffs: Vec<f64>,
}

fn slab_solve(cfg: &IterationConfig, visc: Viscosities, c: &SlabCoefficients, start: &TimeTrack) -> Result<SlabSolve> {
    let steps = cfg.steps()?;
    let dt = cfg.dt;
    let zero_b = Field::zeros(c.grid, Rank::Tensor);
    let unit_j = Field::constant(c.grid, 1.0);
    let b_at = |n: usize| c.b.map_or(&zero_b, |b| &b.samples[n]);
    let j_at = |n: usize| c.j.map_or(&unit_j, |j| &j.samples[n]);

    let fixed: Vec<(Field, Field)> = (0..=steps)
        .into_par_iter()
        .map(|n| -> Result<(Field, Field)> {
            let r = &c.r.samples[n];
            let it = fixed_interior_terms(b_at(n), r)?;
            let mut f = c.f_ext.clone();
            f.axpy(1.0, &it[0]);
            f.axpy(1.0, &it[1]);
            let kt = fixed_boundary_terms(b_at(n), j_at(n), r)?;
            let mut h = c.dwdn.samples[n].retagged(kt[0].grid);
            h.axpy(1.0, c.h_ext);
            for k in &kt {
                h.axpy(1.0, k);
            }
            Ok((f, h))
        })
        .collect::<Result<_>>()?;

    let solver = LameSolver::new(c.grid, visc, cfg.scheme)?;
    let build = |extra: Option<&[(Field, Field)]>| -> Result<LameProblem> {
        let (mut fs, mut hs): (Vec<Field>, Vec<Field>) = fixed.iter().cloned().unzip();
        if let Some(extra) = extra {
            for (n, (fv, hv)) in extra.iter().enumerate() {
                fs[n].axpy(1.0, fv);
                hs[n].axpy(1.0, hv);
            }
        }
        LameProblem::new(c.r.clone(), TimeTrack::new(dt, fs)?, TimeTrack::new(dt, hs)?, c.v0.clone(), visc)
    };

    if c.b.is_none() && c.j.is_none() {
        let problem = build(None)?;
        let vbar = solver.solve(&problem)?;
        return Ok(SlabSolve { vbar, problem, diffs: Vec::new() });
    }

    let order = cfg.diagnostic_order();
    let mut current = start.clone();
    let mut diffs = Vec::new();
    for _ in 0..cfg.inner_max_sweeps {
        let lagged: Vec<(Field, Field)> = (0..=steps)
            .into_par_iter()
            .map(|n| -> Result<(Field, Field)> {
                let inp = TermInputs {
                    vbar: &current.samples[n],
                    b: b_at(n),
                    j: j_at(n),
                    r: &c.r.samples[n],
                    visc,
                };
                let it = velocity_interior_terms(&inp)?;
                let kt = boundary_terms(&inp)?;
                Ok((sum_terms(&it, &[0, 1, 2, 3, 4, 5]), sum_terms(&kt, &VELOCITY_K)))
            })
            .collect::<Result<_>>()?;
        let problem = build(Some(&lagged))?;
        let next = solver.solve(&problem)?;
        let d = k_norm(&next.sub(&current)?, order)?;
        diffs.push(d);
        current = next;
        if d < 0.1 * cfg.tol {
            return Ok(SlabSolve { vbar: current, problem, diffs });
        }
    }
    Err(FsiError::InnerDivergence { sweeps: cfg.inner_max_sweeps, last_diff: *diffs.last().unwrap_or(&f64::NAN) })
}

fn join_slabs<T: Send>(f: impl Fn(usize) -> Result<T> + Sync) -> Result<Pair<T>> {
    let (lo, up) = rayon::join(|| f(0), || f(1));
    Ok(Pair::new(lo?, up?))
}

fn finish(
    cfg: &IterationConfig,
    data: &FsiData,
    v: &Pair<TimeTrack>,
    r: Pair<TimeTrack>,
    kin: Option<Pair<KinematicTrack>>,
) -> Result<StepOutput> {
    let wave = wave_stage(data, v)?;
    let slabs = [data.geometry.lower(), data.geometry.upper()];
    let rs = [&r.lower, &r.upper];
    let dwdn = [&wave.dwdn.lower, &wave.dwdn.upper];
    let v0 = [&data.v0.lower, &data.v0.upper];
    let fe = [&data.loads.f.lower, &data.loads.f.upper];
    let he = [&data.loads.h.lower, &data.loads.h.upper];
    let starts = [&v.lower, &v.upper];
    let out = join_slabs(|i| {
        let (b, j) = match &kin {
            Some(k) => {
                let k = if i == 0 { &k.lower } else { &k.upper };
                (Some(&k.b), Some(&k.j))
            }
            None => (None, None),
        };
        let c = SlabCoefficients { grid: slabs[i], r: rs[i], b, j, dwdn: dwdn[i], v0: v0[i], f_ext: fe[i], h_ext: he[i] };
        slab_solve(cfg, data.visc, &c, starts[i])
    })?;
    let inner_diffs = if kin.is_some() {
        let n = out.lower.diffs.len().max(out.upper.diffs.len());
        (0..n)
            .map(|k| {
                let a = out.lower.diffs.get(k).copied().unwrap_or(0.0);
                let b = out.upper.diffs.get(k).copied().unwrap_or(0.0);
                a.hypot(b)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(StepOutput {
        vbar: Pair::new(out.lower.vbar, out.upper.vbar),
        r,
        kinematics: kin,
        wave,
        problems: Pair::new(out.lower.problem, out.upper.problem),
        inner_diffs,
    })
}

fn r0_min(data: &FsiData) -> f64 {
    data.r0.lower.min().min(data.r0.upper.min())
}

/// Λ: density from `div v`, wave driven by `v`, constant-structure parabolic solve.
pub fn lambda_step(cfg: &IterationConfig, data: &FsiData, v: &Pair<TimeTrack>) -> Result<StepOutput> {
    check_iterate(cfg, data, v)?;
    let r = join_slabs(|i| {
        let (r0, vi) = if i == 0 { (&data.r0.lower, &v.lower) } else { (&data.r0.upper, &v.upper) };
        density_closed_form(r0, vi, None)
    })?;
    for t in r.iter() {
        check_floors(None, t, r0_min(data), &cfg.floors)?;
    }
    finish(cfg, data, v, r, None)
}

/// Π with kinematics computed from `v`.
pub fn pi_step(cfg: &IterationConfig, data: &FsiData, v: &Pair<TimeTrack>) -> Result<StepOutput> {
    check_iterate(cfg, data, v)?;
    let kin = join_slabs(|i| kinematics(if i == 0 { &v.lower } else { &v.upper }))?;
    pi_step_with_kinematics(cfg, data, v, kin)
}

/// Π with externally supplied kinematics (`a`, `b`, `J` are used as given).
pub fn pi_step_with_kinematics(
    cfg: &IterationConfig,
    data: &FsiData,
    v: &Pair<TimeTrack>,
    kin: Pair<KinematicTrack>,
) -> Result<StepOutput> {
    check_iterate(cfg, data, v)?;
    let r = join_slabs(|i| {
        let (r0, vi, k) =
            if i == 0 { (&data.r0.lower, &v.lower, &kin.lower) } else { (&data.r0.upper, &v.upper, &kin.upper) };
        density_closed_form(r0, vi, Some(&k.a))
    })?;
    for (t, k) in r.iter().zip(kin.iter()) {
        check_floors(Some(&k.j), t, r0_min(data), &cfg.floors)?;
    }
    finish(cfg, data, v, r, Some(kin))
}

pub fn apply_step(mode: Mode, cfg: &IterationConfig, data: &FsiData, v: &Pair<TimeTrack>) -> Result<StepOutput> {
    match mode {
        Mode::Lambda => lambda_step(cfg, data, v),
        Mode::Pi => pi_step(cfg, data, v),
    }
}

/// `‖v1 − v2‖` in the diagnostic `K^{s+1}` norm.
pub fn diagnostic_diff(cfg: &IterationConfig, v1: &Pair<TimeTrack>, v2: &Pair<TimeTrack>) -> Result<f64> {
    let d = Pair::new(v1.lower.sub(&v2.lower)?, v1.upper.sub(&v2.upper)?);
    pair_k_norm(&d, cfg.diagnostic_order())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsiState {
    pub v: Pair<TimeTrack>,
    pub r: Pair<TimeTrack>,
    pub kinematics: Option<Pair<KinematicTrack>>,
    /// Elastic track `(w, w_t)` with its boundary data.
    pub wave: WaveRun,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFlags {
    pub floor_breached: bool,
    pub ball_exceeded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalResiduals {
    pub lame_lower: LameResidual,
    pub lame_upper: LameResidual,
    /// `‖step(v*) − v*‖` in the diagnostic norm.
    pub self_consistency: f64,
    /// `max |v − w_t|` on both interface planes over samples `1..=N`.
    pub interface_mismatch: f64,
}

impl FinalResiduals {
    pub fn interior(&self) -> f64 {
        self.lame_lower.interior.hypot(self.lame_upper.interior)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub tol: f64,
    /// `d_n = ‖v^{n+1} − v^n‖_{K^{s+1}}`.
    pub diffs: Vec<f64>,
    /// `d_n / d_{n−1}`, present only when `d_{n−1} > 10 tol`.
    pub factors: Vec<Option<f64>>,
    pub iterate_norms: Vec<f64>,
    pub inner_sweeps: Vec<usize>,
    pub converged: bool,
    pub residuals: Option<FinalResiduals>,
    pub flags: ReportFlags,
    pub compatibility: Option<CompatibilityReport>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    fn new(mode: Mode, tol: f64) -> Self {
        ConvergenceReport {
            mode,
            tol,
            diffs: Vec::new(),
            factors: Vec::new(),
            iterate_norms: Vec::new(),
            inner_sweeps: Vec::new(),
            converged: false,
            residuals: None,
            flags: ReportFlags::default(),
            compatibility: None,
            warnings: Vec::new(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.diffs.len()
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointFailure {
    pub error: FsiError,
    pub report: ConvergenceReport,
}

impl std::fmt::Display for FixedPointFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} iterations", self.error, self.report.iterations())
    }
}

impl std::error::Error for FixedPointFailure {}

fn max_interface_mismatch(v: &Pair<TimeTrack>, wave: &WaveRun) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (track, plane) in v.iter().zip([Domain::InterfaceLower, Domain::InterfaceUpper]) {
        for n in 1..track.len() {
            let tv = boundary_trace(&track.samples[n], plane)?;
            let tw = boundary_trace(&wave.states[n].w_t, plane)?;
            for (a, b) in tv.data.iter().zip(&tw.data) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// Iterate `v^{n+1} = step(v^n)` from `v⁰ ≡ v0` until the diagnostic diff
/// drops below `tol`. The compatibility precheck is skipped with
/// `override_compat`.
pub fn run_fixed_point(
    mode: Mode,
    cfg: &IterationConfig,
    data: &FsiData,
    override_compat: bool,
) -> std::result::Result<(FsiState, ConvergenceReport), FixedPointFailure> {
    let mut report = ConvergenceReport::new(mode, cfg.tol);
    let fail = |error: FsiError, mut report: ConvergenceReport| {
        if matches!(error, FsiError::FloorBreach { .. }) {
            report.flags.floor_breached = true;
        }
        FixedPointFailure { error, report }
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(e, report));
    }
    let compat = match data.compatibility(CompatThresholds::default()) {
        Ok(c) => c,
        Err(e) => return Err(fail(e, report)),
    };
    report.compatibility = Some(compat);
    if !compat.all_passed() {
        let msg = compat.describe_failures();
        if !override_compat {
            return Err(fail(FsiError::Incompatible(msg), report));
        }
        report.warnings.push(format!("compatibility override: {msg}"));
    }
    let mut v = match data.initial_iterate(cfg) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, report)),
    };
    let order = cfg.diagnostic_order();
    for _ in 0..cfg.max_iter {
        let out = match apply_step(mode, cfg, data, &v) {
            Ok(o) => o,
            Err(e) => return Err(fail(e, report)),
        };
        let step = (|| -> Result<(f64, f64)> { Ok((diagnostic_diff(cfg, &out.vbar, &v)?, pair_k_norm(&out.vbar, order)?)) })();
        let (d, norm) = match step {
            Ok(x) => x,
            Err(e) => return Err(fail(e, report)),
        };
        let factor = report.diffs.last().filter(|&&prev| prev > 10.0 * cfg.tol).map(|prev| d / prev);
        report.factors.push(factor);
        report.diffs.push(d);
        report.iterate_norms.push(norm);
        report.inner_sweeps.push(out.inner_diffs.len());
        if norm > cfg.m_report {
            report.flags.ball_exceeded = true;
        }
        for w in &out.wave.warnings {
            if !report.warnings.contains(w) {
                report.warnings.push(w.clone());
            }
        }
        v = out.vbar;
        if d < cfg.tol {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        let last_diff = *report.diffs.last().unwrap_or(&f64::NAN);
        let iterations = report.iterations();
        return Err(fail(FsiError::NonConvergence { iterations, last_diff }, report));
    }
    let check = match apply_step(mode, cfg, data, &v) {
        Ok(o) => o,
        Err(e) => return Err(fail(e, report)),
    };
    let residuals = (|| -> Result<FinalResiduals> {
        Ok(FinalResiduals {
            lame_lower: lame_residual(&v.lower, &check.problems.lower)?,
            lame_upper: lame_residual(&v.upper, &check.problems.upper)?,
            self_consistency: diagnostic_diff(cfg, &check.vbar, &v)?,
            interface_mismatch: max_interface_mismatch(&v, &check.wave)?,
        })
    })();
    match residuals {
        Ok(r) => report.residuals = Some(r),
        Err(e) => return Err(fail(e, report)),
    }
    let state = FsiState { v, r: check.r, kinematics: check.kinematics, wave: check.wave };
    Ok((state, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// Identical inputs: the quotient is 0/0.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub t: f64,
    pub dt: f64,
    pub input_diff: f64,
    pub output_diff: f64,
    pub factor: Option<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionTable {
    pub mode: Mode,
    pub rows: Vec<ContractionRow>,
    /// Factors strictly decrease along the rows (in the order given).
    pub strictly_decreasing: bool,
    /// Largest window whose factor is below ½ (every tested window at or below it contracts that fast when the factors decrease).
    pub t0_estimate: Option<f64>,
}

/// Output/input diff ratio of one step applied to two iterates.
pub fn contraction_pair(
    mode: Mode,
    cfg: &IterationConfig,
    data: &FsiData,
    v1: &Pair<TimeTrack>,
    v2: &Pair<TimeTrack>,
) -> Result<ContractionRow> {
    let input_diff = diagnostic_diff(cfg, v1, v2)?;
    let o1 = apply_step(mode, cfg, data, v1)?;
    let o2 = apply_step(mode, cfg, data, v2)?;
    let output_diff = diagnostic_diff(cfg, &o1.vbar, &o2.vbar)?;
    let (factor, status) =
        if input_diff == 0.0 { (None, RowStatus::Degenerate) } else { (Some(output_diff / input_diff), RowStatus::Ok) };
    Ok(ContractionRow { t: cfg.t_final, dt: cfg.dt, input_diff, output_diff, factor, status })
}

/// `v0 + amplitude · t · φ_shape(x)`, with `φ` vanishing on the outer walls.
pub fn perturbed_iterate(cfg: &IterationConfig, data: &FsiData, amplitude: f64, shape: usize) -> Result<Pair<TimeTrack>> {
    let g = &data.geometry;
    let (l1, l2, l3) = (g.l1, g.l2, g.l3);
    let phi = move |y: [f64; 3], zeta: f64| -> [f64; 3] {
        let v = if shape % 2 == 0 {
            [y[0].sin(), y[1].cos(), 0.5 * (y[0] + y[1]).cos()]
        } else {
            [y[0].cos(), (y[0] - y[1]).sin(), -0.5 * y[1].sin()]
        };
        v.map(|c| amplitude * zeta * c)
    };
    let dp = Pair::new(
        Field::vector_from_fn(g.lower(), |y| phi(y, y[2] / l1)),
        Field::vector_from_fn(g.upper(), |y| phi(y, (l3 - y[2]) / (l3 - l2))),
    );
    let steps = cfg.steps()?;
    let build = |v0: &Field, d: &Field| TimeTrack::from_fn(cfg.dt, steps, |t| {
        let mut f = v0.clone();
        f.axpy(t, d);
        f
    });
    Ok(Pair::new(build(&data.v0.lower, &dp.lower)?, build(&data.v0.upper, &dp.upper)?))
}

/// For each window length (same number of steps), the contraction factor of
/// one step on two perturbed iterates of size `amplitude`.
pub fn contraction_study(
    mode: Mode,
    cfg: &IterationConfig,
    data: &FsiData,
    t_values: &[f64],
    amplitude: f64,
) -> Result<ContractionTable> {
    if t_values.len() < 2 {
        return Err(FsiError::InvalidParameter("contraction study needs at least 2 window lengths".into()));
    }
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let c = cfg.with_window(t)?;
        c.validate()?;
        let v1 = perturbed_iterate(&c, data, amplitude, 0)?;
        let v2 = perturbed_iterate(&c, data, amplitude, 1)?;
        rows.push(contraction_pair(mode, &c, data, &v1, &v2)?);
    }
    let strictly_decreasing = rows.windows(2).all(|w| match (w[0].factor, w[1].factor) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    });
    let t0_estimate = rows.iter().filter(|r| r.factor.is_some_and(|f| f < 0.5)).map(|r| r.t).fold(None, |m: Option<f64>, t| {
        Some(m.map_or(t, |m| m.max(t)))
    });
    Ok(ContractionTable { mode, rows, strictly_decreasing, t0_estimate })
}
