//! Sequential refinement of per-object probability planes.
//!
//! For frame `t > 0` and object `k`:
//!
//! ```text
//! P~ = warp(P^_{t-1}, F_{t-1->t})           motion-aligned prior
//! R  = H(P_t)                                binary entropy, per object
//! Q  = 1 - exp(-E^2 / 2 sigma^2)             cycle-residual uncertainty, shared
//! K  = clip(Q / (Q + R + eps), kmin, kmax)
//! P^ = K P_t + (1 - K) P~
//! ```
//!
//! The first frame has no prior and is passed through unchanged.

use alloc::{format, vec::Vec};
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::flow::{
    estimate_flow, flow_residual, mean_flow_magnitude, motion_uncertainty, residual_sigma, warp_backward, FlowParams,
    MotionUncertaintyParams,
};
use crate::grid::{same_dims, threshold_mask, GrayFrame, Mask, ScalarField};

/// How the blend weight on the current prediction is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FusionMode {
    /// Uncertainty-driven weight.
    Adaptive,
    /// Constant weight, clipped into `[kappa_min, kappa_max]`.
    Fixed(f64),
    /// No smoothing; the current prediction is returned as is.
    Passthrough,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FusionParams {
    pub epsilon: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// Divide entropy by `ln 2` so it lands in `[0, 1]`.
    pub normalize_entropy: bool,
    pub mode: FusionMode,
    /// Ablation: replace the motion term with the constant 0.5.
    pub disable_motion_uncertainty: bool,
    /// Ablation: replace the entropy term with the constant 0.5.
    pub disable_entropy: bool,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            epsilon: 1e-6,
            kappa_min: 0.05,
            kappa_max: 0.95,
            normalize_entropy: false,
            mode: FusionMode::Adaptive,
            disable_motion_uncertainty: false,
            disable_entropy: false,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon {} must be > 0", self.epsilon)));
        }
        if !(0.0 <= self.kappa_min && self.kappa_min < self.kappa_max && self.kappa_max <= 1.0) {
            return Err(Error::config(format!(
                "need 0 <= kappa_min < kappa_max <= 1, got [{}, {}]",
                self.kappa_min, self.kappa_max
            )));
        }
        if let FusionMode::Fixed(w) = self.mode {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::config(format!("fixed fusion weight {w} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Everything the recursion needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmootherParams {
    pub flow: FlowParams,
    pub motion: MotionUncertaintyParams,
    pub fusion: FusionParams,
}

impl SmootherParams {
    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.motion.validate()?;
        self.fusion.validate()
    }
}

/// Binary entropy in nats with `0 log 0 = 0`.
#[inline]
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * libm::log(q) } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Per-pixel binary entropy of a probability plane, in `[0, ln 2]`, or in
/// `[0, 1]` when `normalize` is set.
pub fn entropy_map(prob: &ScalarField, normalize: bool) -> Result<ScalarField> {
    prob.ensure_probability()?;
    let scale = if normalize { 1.0 / LN_2 } else { 1.0 };
    Ok(ScalarField::from_raw(
        prob.width(),
        prob.height(),
        prob.data().iter().map(|&p| binary_entropy(p) * scale).collect(),
    ))
}

/// Unclipped blend weight `q / (q + r + eps)` after the ablation
/// substitutions.
#[inline]
pub fn raw_blend(q: f64, r: f64, params: &FusionParams) -> f64 {
    let q = if params.disable_motion_uncertainty { 0.5 } else { q };
    let r = if params.disable_entropy { 0.5 } else { r };
    q / (q + r + params.epsilon)
}

/// Clipped per-pixel weight on the current prediction.
pub fn blend_coefficient(q: &ScalarField, r: &ScalarField, params: &FusionParams) -> Result<ScalarField> {
    same_dims(q.dims(), r.dims())?;
    if q.data().iter().chain(r.data()).any(|&v| v < 0.0) {
        return Err(Error::invalid("uncertainty terms must be non-negative"));
    }
    let (lo, hi) = (params.kappa_min, params.kappa_max);
    let k = q.data().iter().zip(r.data()).map(|(&qv, &rv)| raw_blend(qv, rv, params).clamp(lo, hi)).collect();
    Ok(ScalarField::from_raw(q.width(), q.height(), k))
}

/// Convex combination `k * current + (1 - k) * prior`, per pixel.
pub fn fuse(current: &ScalarField, warped_prior: &ScalarField, k: &ScalarField) -> Result<ScalarField> {
    same_dims(current.dims(), warped_prior.dims())?;
    same_dims(current.dims(), k.dims())?;
    if let Some(i) = k.data().iter().position(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::invalid(format!("blend weight {} at index {i} outside [0, 1]", k.data()[i])));
    }
    let out = current
        .data()
        .iter()
        .zip(warped_prior.data())
        .zip(k.data())
        .map(|((&p, &prior), &w)| prior + w * (p - prior))
        .collect();
    Ok(ScalarField::from_raw(current.width(), current.height(), out))
}

/// Recursion state: the refined planes of the previous frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SmootherState {
    pub previous_refined: Option<Vec<ScalarField>>,
    /// Number of frames processed so far.
    pub frame_index: usize,
}

/// Intermediate maps of one step, for reporting and verification.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub frame_index: usize,
    pub flow_magnitude: Option<f64>,
    pub sigma: Option<f64>,
    /// Cycle residual `E` (absent on the first frame and in passthrough).
    pub residual: Option<ScalarField>,
    /// Motion uncertainty `Q`.
    pub motion_uncertainty: Option<ScalarField>,
    /// Per-object warped priors `P~`.
    pub warped_priors: Vec<ScalarField>,
    /// Per-object blend weights `K`.
    pub blend: Vec<ScalarField>,
}

impl StepDiagnostics {
    fn bare(frame_index: usize) -> Self {
        StepDiagnostics {
            frame_index,
            flow_magnitude: None,
            sigma: None,
            residual: None,
            motion_uncertainty: None,
            warped_priors: Vec::new(),
            blend: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub refined: Vec<ScalarField>,
    pub state: SmootherState,
    pub diagnostics: StepDiagnostics,
}

/// One step of the recursion. `prev_frame` must be present for every frame
/// after the first.
pub fn smooth_step(
    state: &SmootherState,
    prev_frame: Option<&GrayFrame>,
    cur_frame: &GrayFrame,
    current_probs: &[ScalarField],
    params: &SmootherParams,
) -> Result<StepOutput> {
    params.validate()?;
    if current_probs.is_empty() {
        return Err(Error::invalid("at least one object plane is required"));
    }
    for p in current_probs {
        same_dims(cur_frame.dims(), p.dims())?;
        p.ensure_probability()?;
    }
    let t = state.frame_index;
    let next_state =
        |refined: &Vec<ScalarField>| SmootherState { previous_refined: Some(refined.clone()), frame_index: t + 1 };

    if params.fusion.mode == FusionMode::Passthrough {
        let refined = current_probs.to_vec();
        return Ok(StepOutput { state: next_state(&refined), refined, diagnostics: StepDiagnostics::bare(t) });
    }

    let prior = match (&state.previous_refined, t) {
        (None, 0) => None,
        (Some(prior), t) if t > 0 => Some(prior),
        (None, _) => return Err(Error::Sequencing(format!("frame {t} has no refined prior"))),
        (Some(_), _) => return Err(Error::Sequencing("state at frame 0 already carries a prior".into())),
    };
    let Some(prior) = prior else {
        let refined = current_probs.to_vec();
        return Ok(StepOutput { state: next_state(&refined), refined, diagnostics: StepDiagnostics::bare(t) });
    };
    let prev_frame =
        prev_frame.ok_or_else(|| Error::Sequencing(format!("frame {t} needs the previous frame for flow")))?;
    same_dims(cur_frame.dims(), prev_frame.dims())?;
    if prior.len() != current_probs.len() {
        return Err(Error::Sequencing(format!(
            "object count changed from {} to {} at frame {t}",
            prior.len(),
            current_probs.len()
        )));
    }

    let fwd = estimate_flow(prev_frame, cur_frame, &params.flow)?;
    let bwd = estimate_flow(cur_frame, prev_frame, &params.flow)?;
    let residual = flow_residual(&fwd, &bwd)?;
    let sigma = residual_sigma(&residual, &params.motion);
    let q = motion_uncertainty(&residual, &params.motion)?;

    let mut refined = Vec::with_capacity(current_probs.len());
    let mut warped_priors = Vec::with_capacity(current_probs.len());
    let mut blend = Vec::with_capacity(current_probs.len());
    for (cur, prev_refined) in current_probs.iter().zip(prior) {
        let warped = warp_backward(prev_refined, &fwd)?;
        let k = match params.fusion.mode {
            FusionMode::Fixed(w) => {
                let w = w.clamp(params.fusion.kappa_min, params.fusion.kappa_max);
                ScalarField::filled(cur.width(), cur.height(), w)?
            }
            _ => {
                let r = entropy_map(cur, params.fusion.normalize_entropy)?;
                blend_coefficient(&q, &r, &params.fusion)?
            }
        };
        refined.push(fuse(cur, &warped, &k)?);
        warped_priors.push(warped);
        blend.push(k);
    }

    let diagnostics = StepDiagnostics {
        frame_index: t,
        flow_magnitude: Some(mean_flow_magnitude(&fwd)),
        sigma: Some(sigma),
        residual: Some(residual),
        motion_uncertainty: Some(q),
        warped_priors,
        blend,
    };
    Ok(StepOutput { state: next_state(&refined), refined, diagnostics })
}

/// Streaming driver that keeps the previous frame and state between calls.
#[derive(Debug, Clone)]
pub struct Smoother {
    params: SmootherParams,
    state: SmootherState,
    prev_frame: Option<GrayFrame>,
}

impl Smoother {
    pub fn new(params: SmootherParams) -> Result<Self> {
        params.validate()?;
        Ok(Smoother { params, state: SmootherState::default(), prev_frame: None })
    }

    pub fn frame_index(&self) -> usize {
        self.state.frame_index
    }

    pub fn push(&mut self, frame: GrayFrame, probs: &[ScalarField]) -> Result<(Vec<ScalarField>, StepDiagnostics)> {
        let out = smooth_step(&self.state, self.prev_frame.as_ref(), &frame, probs, &self.params)?;
        self.state = out.state;
        self.prev_frame = Some(frame);
        Ok((out.refined, out.diagnostics))
    }
}

/// Result of a whole-sequence pass, indexed `[frame][object]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutput {
    pub refined: Vec<Vec<ScalarField>>,
    pub masks: Vec<Vec<Mask>>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Runs the recursion over a sequence held in memory and thresholds each
/// refined plane at `threshold`.
pub fn run_sequence(
    frames: &[GrayFrame],
    probs: &[Vec<ScalarField>],
    params: &SmootherParams,
    threshold: f64,
) -> Result<SequenceOutput> {
    if frames.is_empty() {
        return Err(Error::invalid("sequence has no frames"));
    }
    if frames.len() != probs.len() {
        return Err(Error::invalid(format!("{} frames but {} probability sets", frames.len(), probs.len())));
    }
    let mut smoother = Smoother::new(*params)?;
    let mut out = SequenceOutput {
        refined: Vec::with_capacity(frames.len()),
        masks: Vec::with_capacity(frames.len()),
        diagnostics: Vec::with_capacity(frames.len()),
    };
    for (frame, planes) in frames.iter().zip(probs) {
        let (refined, diag) = smoother.push(frame.clone(), planes)?;
        let masks = refined.iter().map(|p| threshold_mask(p, threshold)).collect::<Result<Vec<_>>>()?;
        out.refined.push(refined);
        out.masks.push(masks);
        out.diagnostics.push(diag);
    }
    Ok(out)
}
