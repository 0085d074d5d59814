//! Dispatch of one configured run and the artifacts it writes.

use std::path::PathBuf;
use std::time::Instant;

use fsi_core::fsi::{
    contraction_study, crafted_compatible_triple, run_fixed_point, CompatThresholds, ConvergenceReport, ExternalLoads,
    FsiData, FsiState, IterationConfig, Mode, RowStatus,
};
use fsi_core::fsi::compat::CONDITION_NAMES;
use fsi_core::inequality::{
    hidden_regularity_suite, shipped_symbol_matrix, symbol_records, symbol_suite, trace_suite, verify_trace_inequality,
    BandLimited, SuiteSummary, TraceParams, DRIFT_NOTE,
};
use fsi_core::norms::{pair_sobolev_norm, sobolev_norm};
use fsi_core::wave::wave_energy;
use fsi_core::{build_geometry, Field, FsiError, Pair, Rank};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifacts::{artifact_hash, fmt_f64, fmt_opt, OutputDir};
use crate::checkpoint::Checkpoint;
use crate::config::{InitialData, RunConfig, RunMode};
use crate::error::{core_exit_code, exit, ErrorInfo, HarnessError};
use crate::mms::{decay_suite, spatial_study, temporal_study, Study};

/// Spatial MMS order must reach this fitted slope.
pub const SPACE_ORDER_MIN: f64 = 1.95;
/// Temporal MMS order must lie within this distance of 1.
pub const TIME_ORDER_BAND: f64 = 0.1;
/// Relative change of a suite maximum under refinement that counts as drift.
pub const REFINEMENT_BAND: f64 = 0.2;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Recompute the norm series of a saved state instead of solving.
    pub from_checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool: String,
    pub mode: RunMode,
    pub config: RunConfig,
    /// Hash of the canonical config text without the output location, plus the
    /// checkpoint bytes when reloading.
    pub input_hash: String,
    pub wall_time_s: f64,
    pub result: Value,
    pub warnings: Vec<String>,
    pub failed_checks: Vec<String>,
    pub error: Option<ErrorInfo>,
    pub exit_code: i32,
    pub artifacts: Vec<String>,
}

#[derive(Default)]
struct Outcome {
    result: Value,
    warnings: Vec<String>,
    failed_checks: Vec<String>,
    error: Option<FsiError>,
}

/// Initial data and loads selected by the `[data]` block.
pub fn build_data(cfg: &RunConfig) -> Result<FsiData, HarnessError> {
    let g = cfg.geometry()?;
    let visc = cfg.viscosities()?;
    let data = match cfg.data.initial {
        InitialData::Crafted => {
            let (v0, w1, r0) = crafted_compatible_triple(&g, visc, cfg.data.amplitude)?;
            FsiData::new(g, visc, v0, r0, w1, ExternalLoads::zero(&g))?
        }
        InitialData::Rest | InitialData::RestUnloaded => {
            let v0 = Pair::new(Field::zeros(g.lower(), Rank::Vector), Field::zeros(g.upper(), Rank::Vector));
            let r0 = Pair::new(Field::constant(g.lower(), 1.0), Field::constant(g.upper(), 1.0));
            let loads = match cfg.data.initial {
                InitialData::Rest => ExternalLoads::pressure_cancelling(&g, &r0)?,
                _ => ExternalLoads::zero(&g),
            };
            FsiData::new(g, visc, v0, r0, Field::zeros(g.elastic(), Rank::Vector), loads)?
        }
    };
    Ok(data)
}

/// Validate, run the configured mode, write artifacts and `summary.json`.
/// Solver failures are recorded in the summary; only config and I/O problems
/// before any output are returned as errors.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut input = RunConfig { output_dir: PathBuf::new(), ..cfg.clone() }.to_toml().into_bytes();
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let outcome = match (cfg.mode, &opts.from_checkpoint) {
        (RunMode::Lambda | RunMode::Pi, Some(path)) => {
            let bytes = std::fs::read(path).map_err(|e| HarnessError::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
            input.extend_from_slice(&bytes);
            reload(cfg, &Checkpoint::load(path)?, &mut out)?
        }
        (_, Some(_)) => return Err(HarnessError::Config("--from-checkpoint applies to simulate runs only".into())),
        (RunMode::Lambda | RunMode::Pi, None) => simulate(cfg, &mut out)?,
        (RunMode::Lemmas, None) => lemmas(cfg, &mut out)?,
        (RunMode::Compat, None) => compat(cfg, &mut out)?,
        (RunMode::Contraction, None) => contraction(cfg, &mut out)?,
        (RunMode::Mms, None) => mms(cfg, &mut out)?,
    };
    let exit_code = match (&outcome.error, outcome.failed_checks.is_empty(), outcome.warnings.is_empty()) {
        (Some(e), _, _) => core_exit_code(e),
        (None, false, _) => exit::CHECK_FAILED,
        (None, true, false) => exit::WARNINGS,
        (None, true, true) => exit::OK,
    };
    let mut artifacts = out.written().to_vec();
    artifacts.push("summary.json".into());
    let summary = RunSummary {
        tool: format!("fsi-lab {}", env!("CARGO_PKG_VERSION")),
        mode: cfg.mode,
        config: cfg.clone(),
        input_hash: artifact_hash(&input),
        wall_time_s: start.elapsed().as_secs_f64(),
        result: outcome.result,
        warnings: outcome.warnings,
        failed_checks: outcome.failed_checks,
        error: outcome.error.as_ref().map(ErrorInfo::from_core),
        exit_code,
        artifacts,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}

fn picard_mode(cfg: &RunConfig) -> Mode {
    cfg.mode.picard().expect("simulate runs use lambda or pi")
}

/// One row per sample: `‖v‖_{H^s}`, `‖R‖_{H^s}` over both fluid slabs, grid
/// L² norms of `w` and `w_t`, and the discrete wave energy.
pub fn norm_rows(state: &FsiState, s: f64) -> Result<Vec<Vec<String>>, HarnessError> {
    let v = &state.v;
    let mut rows = Vec::with_capacity(v.lower.len());
    for n in 0..v.lower.len() {
        let vp = Pair::new(v.lower.samples[n].clone(), v.upper.samples[n].clone());
        let rp = Pair::new(state.r.lower.samples[n].clone(), state.r.upper.samples[n].clone());
        let el = &state.wave.states[n];
        rows.push(vec![
            n.to_string(),
            fmt_f64(v.lower.time(n)),
            fmt_f64(pair_sobolev_norm(&vp, s)?),
            fmt_f64(pair_sobolev_norm(&rp, s)?),
            fmt_f64(sobolev_norm(&el.w, 0.0)?),
            fmt_f64(sobolev_norm(&el.w_t, 0.0)?),
            fmt_f64(wave_energy(el)),
        ]);
    }
    Ok(rows)
}

pub const NORMS_HEADER: [&str; 7] = ["step", "t", "v_hs", "r_hs", "w_l2", "wt_l2", "energy"];

fn write_norms(out: &mut OutputDir, state: &FsiState, s: f64) -> Result<(), HarnessError> {
    out.write_csv("norms.csv", &[], &NORMS_HEADER, &norm_rows(state, s)?)
}

fn write_iterations(out: &mut OutputDir, rep: &ConvergenceReport) -> Result<(), HarnessError> {
    let rows: Vec<Vec<String>> = (0..rep.diffs.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                fmt_f64(rep.diffs[i]),
                fmt_opt(rep.factors[i]),
                fmt_f64(rep.iterate_norms[i]),
                rep.inner_sweeps[i].to_string(),
            ]
        })
        .collect();
    out.write_csv("iterations.csv", &[], &["iteration", "diff", "factor", "iterate_norm", "inner_sweeps"], &rows)
}

fn report_warnings(rep: &ConvergenceReport, cfg: &IterationConfig) -> Vec<String> {
    let mut w = rep.warnings.clone();
    if rep.flags.ball_exceeded {
        w.push(format!("iterate norm exceeded M_report = {}", cfg.m_report));
    }
    if rep.flags.floor_breached {
        w.push("a J or R floor was breached".into());
    }
    w
}

fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let mode = picard_mode(cfg);
    let icfg = cfg.iteration.to_core();
    let data = build_data(cfg)?;
    match run_fixed_point(mode, &icfg, &data, cfg.data.override_compat) {
        Ok((state, rep)) => {
            write_iterations(out, &rep)?;
            write_norms(out, &state, icfg.s)?;
            let warnings = report_warnings(&rep, &icfg);
            out.write_json("checkpoint.json", &Checkpoint::new(mode, icfg, data, state))?;
            Ok(Outcome { result: json!({ "report": rep }), warnings, ..Outcome::default() })
        }
        Err(fail) => {
            write_iterations(out, &fail.report)?;
            let warnings = report_warnings(&fail.report, &icfg);
            Ok(Outcome { result: json!({ "report": fail.report }), warnings, error: Some(fail.error), ..Outcome::default() })
        }
    }
}

fn reload(cfg: &RunConfig, cp: &Checkpoint, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    write_norms(out, &cp.state, cp.iteration.s)?;
    let mut warnings = Vec::new();
    if cp.mode != picard_mode(cfg) {
        warnings.push(format!("checkpoint was written in {:?} mode", cp.mode));
    }
    let result = json!({
        "checkpoint_mode": cp.mode,
        "checkpoint_iteration": cp.iteration,
        "checkpoint_geometry": cp.geometry,
        "norm_window": cp.norm_window,
    });
    Ok(Outcome { result, warnings, ..Outcome::default() })
}

fn suite_json(s: &SuiteSummary) -> Value {
    json!({ "max_ratio": s.max_ratio, "skipped": s.skipped, "count": s.records.len() })
}

fn refinement_check(name: &str, coarse: &SuiteSummary, fine: &SuiteSummary, out: &mut Outcome) -> Value {
    match (coarse.max_ratio, fine.max_ratio) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
            let change = b / a - 1.0;
            if change.abs() > REFINEMENT_BAND {
                out.warnings.push(format!("{name}: max ratio moved by {:+.1}% under refinement", 100.0 * change));
            }
            json!(change)
        }
        _ => {
            out.failed_checks.push(format!("{name}: max ratio not finite"));
            Value::Null
        }
    }
}

/// Largest relative change of the trace ratio when the first suite track is
/// scaled by a few constants.
fn trace_scaling_defect(cfg: &RunConfig, params: TraceParams) -> Result<f64, HarnessError> {
    let g = cfg.geometry()?.lower();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.trace);
    let u = BandLimited::random(&mut rng, 3).track(g, cfg.lab.trace_window, cfg.lab.trace_steps)?;
    let base = verify_trace_inequality(&u, params)?.ratio;
    let mut worst = 0.0_f64;
    for c in [-2.0, 1e-3, 7.5] {
        let scaled = verify_trace_inequality(&u.scaled(c), params)?.ratio;
        if let (Some(a), Some(b)) = (base, scaled) {
            worst = worst.max((b / a - 1.0).abs());
        }
    }
    Ok(worst)
}

fn lemmas(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let lab = &cfg.lab;
    let g = cfg.geometry()?;
    let mut o = Outcome::default();

    let rows = symbol_suite(&shipped_symbol_matrix(), lab.symbol_grid)?;
    out.write_lab_csv("symbol.csv", &symbol_records(&rows))?;
    for (i, r) in rows.iter().enumerate() {
        if r.check.violations > 0 {
            o.failed_checks.push(format!("symbol tuple {i}: {} violations", r.check.violations));
        }
        if r.halved.violations == 0 {
            o.failed_checks.push(format!("symbol tuple {i}: halved constant shows no violation"));
        }
    }

    let params = TraceParams::new(lab.trace_r, lab.trace_theta)?;
    let trace = trace_suite(g.lower(), lab.trace_window, lab.trace_steps, lab.trace_tracks, cfg.seeds.trace, params)?;
    out.write_lab_csv("trace.csv", &trace.records)?;
    let scaling = trace_scaling_defect(cfg, params)?;
    if scaling > 1e-10 {
        o.failed_checks.push(format!("trace ratio changed by {scaling:.3e} under scaling"));
    }

    let hdt = lab.hidden_window / lab.hidden_steps as f64;
    let hidden = hidden_regularity_suite(&g, hdt, lab.hidden_steps, lab.hidden_runs, cfg.seeds.hidden, lab.hidden_beta, lab.hidden_form)?;
    out.write_lab_csv("hidden.csv", &hidden.records)?;

    let mut refined = json!(null);
    if lab.refine {
        let fine_geo = build_geometry(g.l1, g.l2, g.l3, 2 * g.n1, 2 * g.n2, 2 * g.m_lo, g.m_up, g.m_el)?;
        let trace_fine = trace_suite(fine_geo.lower(), lab.trace_window, 2 * lab.trace_steps, lab.trace_tracks, cfg.seeds.trace, params)?;
        out.write_lab_csv("trace_refined.csv", &trace_fine.records)?;
        let hidden_fine =
            hidden_regularity_suite(&g, hdt / 2.0, 2 * lab.hidden_steps, lab.hidden_runs, cfg.seeds.hidden, lab.hidden_beta, lab.hidden_form)?;
        out.write_lab_csv("hidden_refined.csv", &hidden_fine.records)?;
        refined = json!({
            "trace": suite_json(&trace_fine),
            "trace_change": refinement_check("trace suite", &trace, &trace_fine, &mut o),
            "hidden": suite_json(&hidden_fine),
            "hidden_change": refinement_check("hidden-regularity suite", &hidden, &hidden_fine, &mut o),
        });
    } else {
        for (name, s) in [("trace suite", &trace), ("hidden-regularity suite", &hidden)] {
            if !s.max_ratio.is_some_and(f64::is_finite) {
                o.failed_checks.push(format!("{name}: max ratio not finite"));
            }
        }
    }

    o.result = json!({
        "note": DRIFT_NOTE,
        "symbol": rows.iter().map(|r| json!({
            "params": r.params, "c_eps": r.c_eps, "violations": r.check.violations,
            "points": r.check.points, "worst_ratio": r.check.worst_ratio, "halved_violations": r.halved.violations,
        })).collect::<Vec<_>>(),
        "trace": suite_json(&trace),
        "trace_scaling_defect": scaling,
        "hidden": suite_json(&hidden),
        "refined": refined,
    });
    Ok(o)
}

fn compat(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let data = build_data(cfg)?;
    let rep = data.compatibility(CompatThresholds::default())?;
    let rows: Vec<Vec<String>> = (0..4)
        .map(|i| {
            vec![
                (i + 1).to_string(),
                CONDITION_NAMES[i].to_string(),
                fmt_f64(rep.residuals[i]),
                fmt_f64(rep.thresholds[i]),
                rep.passed(i).to_string(),
            ]
        })
        .collect();
    out.write_csv("compat.csv", &[], &["condition", "name", "residual", "threshold", "passed"], &rows)?;
    let failed_checks = rep.failures().iter().map(|&i| format!("compatibility condition {}: {}", i + 1, CONDITION_NAMES[i])).collect();
    Ok(Outcome { result: json!({ "report": rep, "all_passed": rep.all_passed() }), failed_checks, ..Outcome::default() })
}

fn contraction(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let data = build_data(cfg)?;
    let c = &cfg.contraction;
    let mut o = Outcome::default();
    let table = match contraction_study(c.map, &cfg.iteration.to_core(), &data, &c.windows, c.amplitude) {
        Ok(t) => t,
        Err(e) => {
            o.error = Some(e);
            return Ok(o);
        }
    };
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let status = match r.status {
                RowStatus::Ok => "ok",
                RowStatus::Degenerate => "degenerate",
            };
            vec![fmt_f64(r.t), fmt_f64(r.dt), fmt_f64(r.input_diff), fmt_f64(r.output_diff), fmt_opt(r.factor), status.into()]
        })
        .collect();
    out.write_csv("contraction.csv", &[], &["t", "dt", "input_diff", "output_diff", "factor", "status"], &rows)?;
    if !table.strictly_decreasing {
        o.warnings.push("contraction factors do not strictly decrease".into());
    }
    if table.rows.iter().any(|r| !r.factor.is_some_and(|f| f < 1.0)) {
        o.warnings.push("some window does not contract (factor >= 1 or degenerate)".into());
    }
    o.result = json!({ "table": table });
    Ok(o)
}

fn study_rows(s: &Study) -> Vec<Vec<String>> {
    s.rows.iter().map(|r| vec![r.count.to_string(), fmt_f64(r.h), fmt_f64(r.max_error), fmt_opt(r.order)]).collect()
}

fn mms(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let g = cfg.geometry()?;
    let visc = cfg.viscosities()?;
    let m = &cfg.mms;
    let mut o = Outcome::default();

    let space = spatial_study(&g, visc, &m.space_levels)?;
    out.write_csv("mms_space.csv", &[], &["m", "dz", "max_error", "order"], &study_rows(&space))?;
    if !(space.fitted_order >= SPACE_ORDER_MIN) {
        o.failed_checks.push(format!("spatial order {:.3} below {SPACE_ORDER_MIN}", space.fitted_order));
    }

    let time = temporal_study(&g, visc, m.time_window, &m.time_steps)?;
    out.write_csv("mms_time.csv", &[], &["steps", "dt", "max_error", "order"], &study_rows(&time))?;
    if !((time.fitted_order - 1.0).abs() <= TIME_ORDER_BAND) {
        o.failed_checks.push(format!("temporal order {:.3} outside 1 +- {TIME_ORDER_BAND}", time.fitted_order));
    }

    let decay = decay_suite(&g, m.decay_runs, cfg.seeds.mms)?;
    let rows: Vec<Vec<String>> = decay
        .iter()
        .map(|d| {
            vec![
                d.run.to_string(),
                if d.upper { "upper" } else { "lower" }.into(),
                fmt_f64(d.lambda),
                fmt_f64(d.mu),
                fmt_f64(d.r),
                fmt_f64(d.dt),
                fmt_f64(d.initial_norm),
                fmt_f64(d.final_norm),
                d.violations.to_string(),
            ]
        })
        .collect();
    out.write_csv("l2_decay.csv", &[], &["run", "slab", "lambda", "mu", "r", "dt", "initial_norm", "final_norm", "violations"], &rows)?;
    let violations: usize = decay.iter().map(|d| d.violations).sum();
    if violations > 0 {
        o.failed_checks.push(format!("L2 norm grew in {violations} steps"));
    }
    o.result = json!({
        "space": space,
        "time": time,
        "decay_runs": decay.len(),
        "decay_violations": violations,
    });
    Ok(o)
}
