//! Full coupled state plus the metadata needed to recompute its norms.

use std::path::Path;

use fsi_core::fsi::{FsiData, FsiState, IterationConfig, Mode};
use fsi_core::geometry::ChannelGeometry;
use fsi_core::norms::WINDOW_DESCRIPTION;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const CHECKPOINT_FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub mode: Mode,
    pub iteration: IterationConfig,
    pub geometry: ChannelGeometry,
    /// Time window applied by the fractional time norms when this was written.
    pub norm_window: String,
    pub data: FsiData,
    pub state: FsiState,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn new(mode: Mode, iteration: IterationConfig, data: FsiData, state: FsiState) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT,
            mode,
            iteration,
            geometry: data.geometry,
            norm_window: WINDOW_DESCRIPTION.into(),
            data,
            state,
        }
    }

    /// Grids and sample counts agree with the stored geometry and window.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(bad(format!("unsupported format {} (expected {CHECKPOINT_FORMAT})", self.format)));
        }
        if self.norm_window != WINDOW_DESCRIPTION {
            return Err(bad(format!("written with norm window \"{}\", this build uses \"{WINDOW_DESCRIPTION}\"", self.norm_window)));
        }
        if self.data.geometry != self.geometry {
            return Err(bad("data geometry differs from the checkpoint geometry"));
        }
        let samples = self.iteration.steps()? + 1;
        let g = &self.geometry;
        let st = &self.state;
        for (track, grid) in [(&st.v.lower, g.lower()), (&st.v.upper, g.upper()), (&st.r.lower, g.lower()), (&st.r.upper, g.upper())] {
            if track.grid() != grid || track.len() != samples {
                return Err(bad("fluid tracks do not match the geometry and window"));
            }
            if (track.dt - self.iteration.dt).abs() > 1e-12 * self.iteration.dt {
                return Err(bad("track step differs from the stored dt"));
            }
        }
        if st.wave.states.len() != samples || st.wave.states.iter().any(|s| s.w.grid != g.elastic()) {
            return Err(bad("elastic states do not match the geometry and window"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let cp: Checkpoint = serde_json::from_slice(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        cp.validate()?;
        Ok(cp)
    }
}
