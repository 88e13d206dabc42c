//! Run configuration written as `run_config.json` into every output
//! directory.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tpsmooth_core::flow::{FlowParams, MotionUncertaintyParams};
use tpsmooth_core::metrics::UssWeights;
use tpsmooth_core::smoother::{FusionParams, SmootherParams};
use tpsmooth_core::synth::{DegradationSpec, SceneSpec};

use crate::error::{AppError, AppResult};

/// How USS normalization statistics are gathered when comparing runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum UssScope {
    /// Each run against its own series.
    PerRun,
    /// Both runs' frames pooled per object.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub preset: String,
    pub scene: SceneSpec,
    pub degradation: DegradationSpec,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub flow: FlowParams,
    pub motion: MotionUncertaintyParams,
    pub fusion: FusionParams,
    pub threshold: f64,
    pub boundary_tolerance: f64,
    pub uss_weights: UssWeights,
    pub uss_scope: UssScope,
    pub bidirectional_flow: bool,
    pub verify: bool,
    pub synth: Option<SynthConfig>,
}

impl RunConfig {
    pub fn new(command: &str, output_dir: PathBuf) -> Self {
        RunConfig {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            output_dir,
            seed: None,
            flow: FlowParams::default(),
            motion: MotionUncertaintyParams::default(),
            fusion: FusionParams::default(),
            threshold: 0.5,
            boundary_tolerance: tpsmooth_core::metrics::DEFAULT_BOUNDARY_TOLERANCE,
            uss_weights: UssWeights::default(),
            uss_scope: UssScope::PerRun,
            bidirectional_flow: false,
            verify: false,
            synth: None,
        }
    }

    pub fn smoother_params(&self) -> SmootherParams {
        SmootherParams { flow: self.flow, motion: self.motion, fusion: self.fusion }
    }

    pub fn eval_params(&self) -> tpsmooth_core::metrics::EvalParams {
        tpsmooth_core::metrics::EvalParams { boundary_tolerance: self.boundary_tolerance, weights: self.uss_weights }
    }

    /// Checks every parameter group.
    pub fn validate(&self) -> AppResult<()> {
        self.smoother_params().validate()?;
        self.eval_params().validate()?;
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(AppError::Config(format!("threshold {} must lie in (0, 1)", self.threshold)));
        }
        if let Some(s) = &self.synth {
            s.scene.validate()?;
            s.degradation.validate()?;
            if !(s.fps > 0.0 && s.fps.is_finite()) {
                return Err(AppError::Config(format!("fps {} must be positive", s.fps)));
            }
        }
        Ok(())
    }
}
