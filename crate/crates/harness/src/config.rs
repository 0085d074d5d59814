//! Run configuration: a TOML file with one table per block. Every block and
//! every key is optional; missing values take the defaults printed by
//! `fsi-lab print-defaults`.

use std::path::{Path, PathBuf};

use fsi_core::fsi::{IterationConfig, Mode};
use fsi_core::geometry::{build_geometry, ChannelGeometry};
use fsi_core::inequality::{HiddenForm, TraceParams};
use fsi_core::kinematics::Floors;
use fsi_core::lame::{TimeScheme, Viscosities};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Lambda,
    Pi,
    Lemmas,
    Compat,
    Contraction,
    Mms,
}

impl RunMode {
    /// Picard map used by `simulate` and `contraction`.
    pub fn picard(self) -> Option<Mode> {
        match self {
            RunMode::Lambda => Some(Mode::Lambda),
            RunMode::Pi => Some(Mode::Pi),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub n1: usize,
    pub n2: usize,
    pub m_lower: usize,
    pub m_upper: usize,
    pub m_elastic: usize,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        GeometryBlock { l1: 1.0, l2: 2.0, l3: 3.0, n1: 8, n2: 8, m_lower: 8, m_upper: 8, m_elastic: 8 }
    }
}

impl GeometryBlock {
    pub fn build(&self) -> Result<ChannelGeometry, fsi_core::FsiError> {
        build_geometry(self.l1, self.l2, self.l3, self.n1, self.n2, self.m_lower, self.m_upper, self.m_elastic)
    }
}

pub const IDENTITY_LAW: &str = "identity";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsBlock {
    pub lambda: f64,
    pub mu: f64,
    /// Only `q(R) = R` is supported.
    pub pressure_law: String,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        PhysicsBlock { lambda: 1.0, mu: 0.5, pressure_law: IDENTITY_LAW.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloorsBlock {
    pub j_floor: f64,
    pub r_rel_floor: f64,
}

impl Default for FloorsBlock {
    fn default() -> Self {
        let f = Floors::default();
        FloorsBlock { j_floor: f.j_floor, r_rel_floor: f.r_rel_floor }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationBlock {
    pub s: f64,
    pub t_final: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub inner_max_sweeps: usize,
    pub m_report: f64,
    pub floors: FloorsBlock,
}

impl Default for IterationBlock {
    fn default() -> Self {
        let c = IterationConfig::default();
        IterationBlock {
            s: c.s,
            t_final: 0.05,
            dt: 0.05 / 8.0,
            tol: c.tol,
            max_iter: c.max_iter,
            inner_max_sweeps: c.inner_max_sweeps,
            m_report: 100.0,
            floors: FloorsBlock::default(),
        }
    }
}

impl IterationBlock {
    pub fn to_core(&self) -> IterationConfig {
        IterationConfig {
            s: self.s,
            t_final: self.t_final,
            dt: self.dt,
            tol: self.tol,
            max_iter: self.max_iter,
            m_report: self.m_report,
            floors: Floors { j_floor: self.floors.j_floor, r_rel_floor: self.floors.r_rel_floor },
            inner_max_sweeps: self.inner_max_sweeps,
            scheme: TimeScheme::BackwardEuler,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    /// Linear normal velocity with constant density, compatible by construction.
    Crafted,
    /// Fluid at rest with interface loads cancelling the pressure.
    Rest,
    /// Fluid at rest without interface loads; fails the interface stress balance.
    RestUnloaded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataBlock {
    pub initial: InitialData,
    pub amplitude: f64,
    /// Run even when a compatibility condition fails (recorded as a warning).
    pub override_compat: bool,
}

impl Default for DataBlock {
    fn default() -> Self {
        DataBlock { initial: InitialData::Crafted, amplitude: 0.05, override_compat: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedsBlock {
    pub trace: u64,
    pub hidden: u64,
    pub mms: u64,
}

impl Default for SeedsBlock {
    fn default() -> Self {
        SeedsBlock { trace: 11, hidden: 5, mms: 2024 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabBlock {
    pub trace_r: f64,
    pub trace_theta: f64,
    pub trace_tracks: usize,
    pub trace_window: f64,
    pub trace_steps: usize,
    /// Points per axis of the held-out symbol grid.
    pub symbol_grid: usize,
    pub hidden_runs: usize,
    pub hidden_form: HiddenForm,
    pub hidden_beta: f64,
    pub hidden_window: f64,
    pub hidden_steps: usize,
    /// Repeat each suite once refined (grid and steps doubled for the trace
    /// suite, steps doubled for the hidden suite).
    pub refine: bool,
}

impl Default for LabBlock {
    fn default() -> Self {
        LabBlock {
            trace_r: 1.0,
            trace_theta: 0.5,
            trace_tracks: 100,
            trace_window: 0.5,
            trace_steps: 16,
            symbol_grid: 100,
            hidden_runs: 50,
            hidden_form: HiddenForm::SpaceTime,
            hidden_beta: 1.0,
            hidden_window: 0.5,
            hidden_steps: 32,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionBlock {
    pub map: Mode,
    /// Window lengths, in the order reported.
    pub windows: Vec<f64>,
    pub amplitude: f64,
}

impl Default for ContractionBlock {
    fn default() -> Self {
        ContractionBlock { map: Mode::Pi, windows: vec![0.2, 0.1, 0.05], amplitude: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsBlock {
    /// Vertical interval counts of the spatial study.
    pub space_levels: Vec<usize>,
    /// Step counts of the temporal study over `time_window`.
    pub time_steps: Vec<usize>,
    pub time_window: f64,
    /// Randomized homogeneous runs of the L² decay check.
    pub decay_runs: usize,
}

impl Default for MmsBlock {
    fn default() -> Self {
        MmsBlock { space_levels: vec![8, 16, 32, 64], time_steps: vec![10, 20, 40, 80], time_window: 0.5, decay_runs: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    pub output_dir: PathBuf,
    pub geometry: GeometryBlock,
    pub physics: PhysicsBlock,
    pub iteration: IterationBlock,
    pub data: DataBlock,
    pub seeds: SeedsBlock,
    pub lab: LabBlock,
    pub contraction: ContractionBlock,
    pub mms: MmsBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: RunMode::Pi,
            output_dir: PathBuf::from("fsi-out"),
            geometry: GeometryBlock::default(),
            physics: PhysicsBlock::default(),
            iteration: IterationBlock::default(),
            data: DataBlock::default(),
            seeds: SeedsBlock::default(),
            lab: LabBlock::default(),
            contraction: ContractionBlock::default(),
            mms: MmsBlock::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    /// Range checks beyond the schema, reusing the core validators.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.geometry.build().map_err(|e| config_err(format!("[geometry] {e}")))?;
        if self.physics.pressure_law != IDENTITY_LAW {
            return Err(config_err(format!(
                "[physics] pressure_law = \"{}\" is not supported: only the identity law q(R) = R is implemented \
                 (the compatibility conditions and the pressure terms assume it)",
                self.physics.pressure_law
            )));
        }
        self.viscosities()?;
        self.iteration.to_core().validate().map_err(|e| config_err(format!("[iteration] {e}")))?;
        let floors = &self.iteration.floors;
        if !(floors.j_floor > 0.0 && floors.j_floor.is_finite()) || !(floors.r_rel_floor > 0.0 && floors.r_rel_floor.is_finite()) {
            return Err(config_err("[iteration.floors] floors must be positive"));
        }
        if !(self.data.amplitude > 0.0 && self.data.amplitude.is_finite()) {
            return Err(config_err(format!("[data] amplitude must be positive, got {}", self.data.amplitude)));
        }
        let lab = &self.lab;
        TraceParams::new(lab.trace_r, lab.trace_theta).map_err(|e| config_err(format!("[lab] {e}")))?;
        for (name, n) in [
            ("trace_tracks", lab.trace_tracks),
            ("trace_steps", lab.trace_steps),
            ("symbol_grid", lab.symbol_grid),
            ("hidden_runs", lab.hidden_runs),
            ("hidden_steps", lab.hidden_steps),
        ] {
            if n < 3 {
                return Err(config_err(format!("[lab] {name} must be at least 3, got {n}")));
            }
        }
        for (name, x) in [("trace_window", lab.trace_window), ("hidden_window", lab.hidden_window)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(config_err(format!("[lab] {name} must be positive, got {x}")));
            }
        }
        match lab.hidden_form {
            HiddenForm::SpaceTime if !(lab.hidden_beta >= 1.0 && lab.hidden_beta.is_finite()) => {
                return Err(config_err(format!("[lab] space-time hidden form needs hidden_beta >= 1, got {}", lab.hidden_beta)));
            }
            HiddenForm::L2Time if !(lab.hidden_beta > 0.0 && lab.hidden_beta < 2.5) => {
                return Err(config_err(format!("[lab] l2-time hidden form needs 0 < hidden_beta < 5/2, got {}", lab.hidden_beta)));
            }
            _ => {}
        }
        let c = &self.contraction;
        if c.windows.len() < 2 || c.windows.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(config_err("[contraction] windows needs at least 2 positive lengths"));
        }
        if !(c.amplitude > 0.0 && c.amplitude.is_finite()) {
            return Err(config_err("[contraction] amplitude must be positive"));
        }
        let m = &self.mms;
        if m.space_levels.len() < 2 || m.space_levels.iter().any(|&n| n < 4 || n % 2 != 0) {
            return Err(config_err("[mms] space_levels needs at least 2 even counts >= 4"));
        }
        if m.time_steps.len() < 2 || m.time_steps.iter().any(|&n| n < 3) {
            return Err(config_err("[mms] time_steps needs at least 2 counts >= 3"));
        }
        if !(m.time_window > 0.0 && m.time_window.is_finite()) {
            return Err(config_err("[mms] time_window must be positive"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ChannelGeometry, HarnessError> {
        self.geometry.build().map_err(|e| config_err(format!("[geometry] {e}")))
    }

    pub fn viscosities(&self) -> Result<Viscosities, HarnessError> {
        Viscosities::new(self.physics.lambda, self.physics.mu).map_err(|e| config_err(format!("[physics] {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse and validate a TOML config. Schema errors carry the line, column and
/// offending key from the TOML parser.
pub fn parse_config_str(text: &str) -> Result<RunConfig, HarnessError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        HarnessError::Config(msg) => config_err(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The default config as TOML, with a short header.
pub fn defaults_toml() -> String {
    format!(
        "# fsi-lab defaults; every key may be omitted.\n\
         # mode: lambda | pi | lemmas | compat | contraction | mms\n\
         # physics.pressure_law accepts only \"identity\".\n\
         # iteration.s must lie in the open interval (2, 2.5); t_final must be a multiple of dt.\n\n{}",
        RunConfig::default().to_toml()
    )
}
