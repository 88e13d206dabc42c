//! Seeded synthetic sequences: textured shapes moving over a textured
//! background, with exact ground-truth masks and flow, plus a degradation
//! model that turns ground truth into unstable probability planes.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`. Each
//! degradation channel reads its own ChaCha stream (see [`Channel`]), so
//! changing one channel's parameters never shifts the draws of another.

use alloc::{format, vec, vec::Vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::flow::sample::bilinear_clamped;
use crate::grid::{sigmoid, FlowField, GrayFrame, Mask, ScalarField};

/// Logit magnitude assigned to clean foreground/background pixels.
pub const LOGIT_AMPLITUDE: f64 = 4.0;

/// ChaCha stream ids, one per source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Texture = 0,
    Noise = 1,
    Jitter = 2,
    Flicker = 3,
    Dropout = 4,
}

fn rng_for(seed: u64, channel: Channel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel as u64);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Wave {
    kx: f64,
    ky: f64,
    phase: f64,
    amp: f64,
}

/// Band-limited procedural texture: a fixed sum of randomly oriented
/// sinusoids with wavelengths between 6 and 32 px. Defined on the
/// continuous plane, so translated copies are exact.
#[derive(Debug, Clone)]
pub struct Texture {
    waves: Vec<Wave>,
    mean: f64,
    contrast: f64,
}

impl Texture {
    const WAVES: usize = 24;

    pub fn new(seed: u64, mean: f64, contrast: f64) -> Self {
        let mut rng = rng_for(seed, Channel::Texture);
        let mut waves = Vec::with_capacity(Self::WAVES);
        for _ in 0..Self::WAVES {
            let angle = rng.random::<f64>() * core::f64::consts::TAU;
            let wavelength = 6.0 + 26.0 * rng.random::<f64>();
            let k = core::f64::consts::TAU / wavelength;
            waves.push(Wave {
                kx: k * libm::cos(angle),
                ky: k * libm::sin(angle),
                phase: rng.random::<f64>() * core::f64::consts::TAU,
                amp: 0.5 + rng.random::<f64>(),
            });
        }
        let total: f64 = waves.iter().map(|w| w.amp).sum();
        // Normalize so the sum of amplitudes is about 2.5, keeping most
        // values within +-1 after scaling by the spread of the sum.
        let norm = 2.5 / total;
        for w in &mut waves {
            w.amp *= norm;
        }
        Texture { waves, mean, contrast }
    }

    /// Intensity at continuous position `(x, y)`, clamped to `[0, 255]`.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s: f64 = self.waves.iter().map(|w| w.amp * libm::sin(w.kx * x + w.ky * y + w.phase)).sum();
        (self.mean + self.contrast * s).clamp(0.0, 255.0)
    }
}

/// Renders `texture` and its copy translated by `shift` (so the second
/// frame's flow from the first is exactly `shift` everywhere).
pub fn translation_pair(width: usize, height: usize, shift: (f64, f64), seed: u64) -> Result<(GrayFrame, GrayFrame)> {
    let tex = Texture::new(seed, 128.0, 40.0);
    let a = GrayFrame::from_fn(width, height, |x, y| tex.sample(x as f64, y as f64))?;
    let b = GrayFrame::from_fn(width, height, |x, y| tex.sample(x as f64 - shift.0, y as f64 - shift.1))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShapeKind {
    Disk { radius: f64 },
    Rectangle { half_width: f64, half_height: f64 },
}

impl ShapeKind {
    /// Signed distance from the shape outline; negative inside.
    fn signed_distance(&self, dx: f64, dy: f64) -> f64 {
        match *self {
            ShapeKind::Disk { radius } => libm::hypot(dx, dy) - radius,
            ShapeKind::Rectangle { half_width, half_height } => {
                let qx = dx.abs() - half_width;
                let qy = dy.abs() - half_height;
                libm::hypot(qx.max(0.0), qy.max(0.0)) + qx.max(qy).min(0.0)
            }
        }
    }

    fn half_extent(&self) -> (f64, f64) {
        match *self {
            ShapeKind::Disk { radius } => (radius, radius),
            ShapeKind::Rectangle { half_width, half_height } => (half_width, half_height),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Trajectory {
    /// `center(t) = start + t * velocity`.
    Linear { start: (f64, f64), velocity: (f64, f64) },
    /// `center(t) = center + amplitude * sin(2 pi t / period + phase)`
    /// per axis, with the vertical axis a quarter period behind.
    Sinusoidal { center: (f64, f64), amplitude: (f64, f64), period: f64, phase: f64 },
}

impl Trajectory {
    pub fn position(&self, t: usize) -> (f64, f64) {
        let t = t as f64;
        match *self {
            Trajectory::Linear { start, velocity } => (start.0 + t * velocity.0, start.1 + t * velocity.1),
            Trajectory::Sinusoidal { center, amplitude, period, phase } => {
                let a = core::f64::consts::TAU * t / period + phase;
                (
                    center.0 + amplitude.0 * libm::sin(a),
                    center.1 + amplitude.1 * libm::sin(a - core::f64::consts::FRAC_PI_2),
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub shapes: Vec<ShapeSpec>,
    pub background_seed: u64,
    /// Texture contrast in intensity units.
    pub contrast: f64,
    /// Seed for the per-shape textures.
    pub seed: u64,
    /// Minimum gap in pixels between every shape's bounding box and the
    /// frame border, at every frame.
    pub margin: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("scene dimensions must be >= 1"));
        }
        if self.frame_count < 2 {
            return Err(Error::config("scene needs at least 2 frames"));
        }
        if self.shapes.is_empty() {
            return Err(Error::config("scene needs at least one shape"));
        }
        if !(self.contrast >= 0.0 && self.margin >= 0.0) {
            return Err(Error::config("contrast and margin must be non-negative"));
        }
        for (k, shape) in self.shapes.iter().enumerate() {
            let (hx, hy) = shape.kind.half_extent();
            if !(hx > 0.0 && hy > 0.0) {
                return Err(Error::config(format!("shape {k} has non-positive size")));
            }
            if let Trajectory::Sinusoidal { period, .. } = shape.trajectory {
                if period.is_nan() || period <= 0.0 {
                    return Err(Error::config(format!("shape {k} has non-positive period")));
                }
            }
            for t in 0..self.frame_count {
                let (cx, cy) = shape.trajectory.position(t);
                let inside = cx - hx >= self.margin
                    && cy - hy >= self.margin
                    && cx + hx <= self.width as f64 - 1.0 - self.margin
                    && cy + hy <= self.height as f64 - 1.0 - self.margin;
                if !inside {
                    return Err(Error::config(format!(
                        "shape {k} leaves the frame (or its {} px margin) at frame {t}",
                        self.margin
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generated sequence. Masks are indexed `[frame][object]`; `gt_flow[t - 1]`
/// is the displacement from frame `t - 1` to frame `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub frames: Vec<GrayFrame>,
    pub gt_masks: Vec<Vec<Mask>>,
    pub gt_flow: Vec<FlowField>,
}

pub fn generate(scene: &SceneSpec) -> Result<SyntheticSequence> {
    scene.validate()?;
    let (w, h) = (scene.width, scene.height);
    let background = Texture::new(scene.background_seed, 100.0, scene.contrast);
    let textures: Vec<Texture> = (0..scene.shapes.len())
        .map(|k| Texture::new(scene.seed.wrapping_add(k as u64 + 1), 160.0, scene.contrast))
        .collect();
    let centers: Vec<Vec<(f64, f64)>> =
        (0..scene.frame_count).map(|t| scene.shapes.iter().map(|s| s.trajectory.position(t)).collect()).collect();

    let mut frames = Vec::with_capacity(scene.frame_count);
    let mut gt_masks = Vec::with_capacity(scene.frame_count);
    for cs in &centers {
        let frame = GrayFrame::from_fn(w, h, |x, y| {
            let (px, py) = (x as f64, y as f64);
            let mut value = background.sample(px, py);
            for ((shape, tex), &(cx, cy)) in scene.shapes.iter().zip(&textures).zip(cs) {
                let coverage = (0.5 - shape.kind.signed_distance(px - cx, py - cy)).clamp(0.0, 1.0);
                if coverage > 0.0 {
                    value = (1.0 - coverage) * value + coverage * tex.sample(px - cx, py - cy);
                }
            }
            value
        })?;
        frames.push(frame);
        let masks = scene
            .shapes
            .iter()
            .zip(cs)
            .map(|(shape, &(cx, cy))| {
                Mask::from_fn(w, h, |x, y| shape.kind.signed_distance(x as f64 - cx, y as f64 - cy) < 0.0)
            })
            .collect::<Result<Vec<_>>>()?;
        gt_masks.push(masks);
    }

    let mut gt_flow = Vec::with_capacity(scene.frame_count - 1);
    for t in 1..scene.frame_count {
        let prev_masks = &gt_masks[t - 1];
        let flow = FlowField::from_fn(w, h, |x, y| {
            // Later shapes are drawn on top and own the pixel.
            (0..scene.shapes.len())
                .rev()
                .find(|&k| prev_masks[k].get(x, y))
                .map(|k| {
                    let (a, b) = (centers[t - 1][k], centers[t][k]);
                    (b.0 - a.0, b.1 - a.1)
                })
                .unwrap_or((0.0, 0.0))
        })?;
        gt_flow.push(flow);
    }
    Ok(SyntheticSequence { frames, gt_masks, gt_flow })
}

/// Controlled instabilities applied to ground-truth masks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DegradationSpec {
    pub logit_noise_std: f64,
    /// Standard deviation in pixels of the per-frame random translation of
    /// each probability plane against ground truth.
    pub jitter_std: f64,
    pub flicker_prob: f64,
    /// Logit multiplier on flickering frames, in `(0, 1)`.
    pub flicker_scale: f64,
    pub dropout_prob: f64,
    pub seed: u64,
}

impl DegradationSpec {
    /// Degradation that reproduces ground truth exactly after thresholding.
    pub fn none(seed: u64) -> Self {
        DegradationSpec {
            logit_noise_std: 0.0,
            jitter_std: 0.0,
            flicker_prob: 0.0,
            flicker_scale: 0.5,
            dropout_prob: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.logit_noise_std >= 0.0 && self.logit_noise_std.is_finite()) {
            return Err(Error::config("logit_noise_std must be >= 0"));
        }
        if !(self.jitter_std >= 0.0 && self.jitter_std.is_finite()) {
            return Err(Error::config("jitter_std must be >= 0"));
        }
        if !unit(self.flicker_prob) || !unit(self.dropout_prob) {
            return Err(Error::config("flicker_prob and dropout_prob must lie in [0, 1]"));
        }
        if !(self.flicker_scale > 0.0 && self.flicker_scale < 1.0) {
            return Err(Error::config("flicker_scale must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Turns ground-truth masks (`[frame][object]`) into probability planes
/// with the same indexing.
///
/// Per frame and object, in order: logits `+-LOGIT_AMPLITUDE`, additive
/// Gaussian noise, a random sub-pixel translation, logit scaling on flicker
/// frames, sigmoid, and zeroing on dropout frames.
pub fn degrade(gt_masks: &[Vec<Mask>], spec: &DegradationSpec) -> Result<Vec<Vec<ScalarField>>> {
    spec.validate()?;
    let mut noise_rng = rng_for(spec.seed, Channel::Noise);
    let mut jitter_rng = rng_for(spec.seed, Channel::Jitter);
    let mut flicker_rng = rng_for(spec.seed, Channel::Flicker);
    let mut dropout_rng = rng_for(spec.seed, Channel::Dropout);
    let noise = Normal::new(0.0, spec.logit_noise_std).map_err(|e| Error::config(format!("{e}")))?;
    let jitter = Normal::new(0.0, spec.jitter_std).map_err(|e| Error::config(format!("{e}")))?;

    let mut out = Vec::with_capacity(gt_masks.len());
    for masks in gt_masks {
        let mut planes = Vec::with_capacity(masks.len());
        for mask in masks {
            let (w, h) = mask.dims();
            let mut logits: Vec<f64> = mask
                .data()
                .iter()
                .map(|&fg| {
                    let base = if fg { LOGIT_AMPLITUDE } else { -LOGIT_AMPLITUDE };
                    base + noise.sample(&mut noise_rng)
                })
                .collect();
            let (jx, jy) = (jitter.sample(&mut jitter_rng), jitter.sample(&mut jitter_rng));
            if jx != 0.0 || jy != 0.0 {
                let src = logits;
                logits = (0..w * h)
                    .map(|i| bilinear_clamped(&src, w, h, (i % w) as f64 - jx, (i / w) as f64 - jy))
                    .collect();
            }
            let flicker = flicker_rng.random::<f64>() < spec.flicker_prob;
            let dropout = dropout_rng.random::<f64>() < spec.dropout_prob;
            let probs = if dropout {
                vec![0.0; w * h]
            } else {
                let s = if flicker { spec.flicker_scale } else { 1.0 };
                logits.iter().map(|&l| sigmoid(s * l)).collect()
            };
            planes.push(ScalarField::from_raw(w, h, probs));
        }
        out.push(planes);
    }
    Ok(out)
}

/// Replays the dropout stream: `true` where [`degrade`] zeroes the plane of
/// `[frame][object]`.
pub fn dropout_schedule(spec: &DegradationSpec, frame_count: usize, object_count: usize) -> Vec<Vec<bool>> {
    let mut rng = rng_for(spec.seed, Channel::Dropout);
    (0..frame_count).map(|_| (0..object_count).map(|_| rng.random::<f64>() < spec.dropout_prob).collect()).collect()
}

/// Named scene + degradation presets.
pub mod presets {
    use super::*;

    pub const NAMES: &[&str] = &["flicker-disk", "static-disk", "translate-rect"];

    /// 64x64, 60 frames: a textured disk on a sinusoidal path with logit
    /// noise, jitter and flicker.
    pub fn flicker_disk(seed: u64) -> (SceneSpec, DegradationSpec) {
        let scene = SceneSpec {
            width: 64,
            height: 64,
            frame_count: 60,
            shapes: vec![ShapeSpec {
                kind: ShapeKind::Disk { radius: 12.0 },
                trajectory: Trajectory::Sinusoidal {
                    center: (32.0, 32.0),
                    amplitude: (10.0, 6.0),
                    period: 40.0,
                    phase: 0.0,
                },
            }],
            background_seed: seed,
            contrast: 40.0,
            seed: seed.wrapping_add(1000),
            margin: 4.0,
        };
        let degradation = DegradationSpec {
            logit_noise_std: 1.0,
            jitter_std: 2.0,
            flicker_prob: 0.2,
            flicker_scale: 0.25,
            dropout_prob: 0.0,
            seed,
        };
        (scene, degradation)
    }

    /// Motionless disk, clean degradation.
    pub fn static_disk(seed: u64) -> (SceneSpec, DegradationSpec) {
        let (mut scene, _) = flicker_disk(seed);
        scene.shapes[0].trajectory = Trajectory::Linear { start: (32.0, 32.0), velocity: (0.0, 0.0) };
        (scene, DegradationSpec::none(seed))
    }

    /// Rectangle translating 2 px/frame to the right, clean degradation.
    pub fn translate_rect(seed: u64) -> (SceneSpec, DegradationSpec) {
        let (mut scene, _) = flicker_disk(seed);
        scene.frame_count = 16;
        scene.shapes[0] = ShapeSpec {
            kind: ShapeKind::Rectangle { half_width: 8.0, half_height: 6.0 },
            trajectory: Trajectory::Linear { start: (14.0, 30.0), velocity: (2.0, 0.0) },
        };
        (scene, DegradationSpec::none(seed))
    }

    pub fn by_name(name: &str, seed: u64) -> Option<(SceneSpec, DegradationSpec)> {
        match name {
            "flicker-disk" => Some(flicker_disk(seed)),
            "static-disk" => Some(static_disk(seed)),
            "translate-rect" => Some(translate_rect(seed)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::threshold_mask;

    fn small_scene(trajectory: Trajectory) -> SceneSpec {
        SceneSpec {
            width: 48,
            height: 40,
            frame_count: 5,
            shapes: vec![ShapeSpec { kind: ShapeKind::Disk { radius: 6.0 }, trajectory }],
            background_seed: 3,
            contrast: 40.0,
            seed: 4,
            margin: 2.0,
        }
    }

    #[test]
    fn static_shape_has_zero_flow_and_fixed_masks() {
        let seq = generate(&small_scene(Trajectory::Linear { start: (20.0, 20.0), velocity: (0.0, 0.0) })).unwrap();
        assert!(seq.gt_flow.iter().all(|f| f.u().iter().chain(f.v()).all(|&a| a == 0.0)));
        assert!(seq.gt_masks.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(seq.frames.len(), 5);
        assert_eq!(seq.gt_flow.len(), 4);
    }

    #[test]
    fn linear_motion_translates_masks() {
        let seq = generate(&small_scene(Trajectory::Linear { start: (12.0, 20.0), velocity: (2.0, 0.0) })).unwrap();
        for t in 1..5 {
            let (prev, cur) = (&seq.gt_masks[t - 1][0], &seq.gt_masks[t][0]);
            for y in 0..40 {
                for x in 2..48 {
                    assert_eq!(cur.get(x, y), prev.get(x - 2, y), "t={t} x={x} y={y}");
                }
            }
            let f = &seq.gt_flow[t - 1];
            for (i, &inside) in prev.data().iter().enumerate() {
                let expect = if inside { 2.0 } else { 0.0 };
                assert_eq!(f.u()[i], expect);
                assert_eq!(f.v()[i], 0.0);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (scene, deg) = presets::flicker_disk(42);
        let a = generate(&scene).unwrap();
        let b = generate(&scene).unwrap();
        assert_eq!(a, b);
        assert_eq!(degrade(&a.gt_masks, &deg).unwrap(), degrade(&b.gt_masks, &deg).unwrap());
    }

    #[test]
    fn shape_leaving_frame_is_rejected() {
        let scene = small_scene(Trajectory::Linear { start: (20.0, 20.0), velocity: (8.0, 0.0) });
        assert!(matches!(generate(&scene), Err(Error::Config(_))));
    }

    #[test]
    fn clean_degradation_thresholds_to_ground_truth() {
        let (scene, _) = presets::flicker_disk(7);
        let seq = generate(&scene).unwrap();
        let probs = degrade(&seq.gt_masks, &DegradationSpec::none(7)).unwrap();
        for (ps, ms) in probs.iter().zip(&seq.gt_masks) {
            for (p, m) in ps.iter().zip(ms) {
                assert_eq!(&threshold_mask(p, 0.5).unwrap(), m);
            }
        }
    }

    #[test]
    fn full_dropout_zeroes_everything() {
        let seq = generate(&small_scene(Trajectory::Linear { start: (20.0, 20.0), velocity: (1.0, 0.0) })).unwrap();
        let spec = DegradationSpec { dropout_prob: 1.0, ..DegradationSpec::none(1) };
        let probs = degrade(&seq.gt_masks, &spec).unwrap();
        assert!(probs.iter().flatten().all(|p| p.data().iter().all(|&v| v == 0.0)));
        assert!(dropout_schedule(&spec, 5, 1).iter().flatten().all(|&d| d));
    }

    #[test]
    fn dropout_schedule_matches_degrade() {
        let (scene, mut deg) = presets::flicker_disk(42);
        deg.dropout_prob = 0.3;
        let seq = generate(&scene).unwrap();
        let probs = degrade(&seq.gt_masks, &deg).unwrap();
        let sched = dropout_schedule(&deg, scene.frame_count, 1);
        for (t, ps) in probs.iter().enumerate() {
            let zero = ps[0].data().iter().all(|&v| v == 0.0);
            assert_eq!(zero, sched[t][0], "frame {t}");
        }
    }

    #[test]
    fn degraded_planes_are_probabilities() {
        let (scene, deg) = presets::flicker_disk(42);
        let seq = generate(&scene).unwrap();
        for p in degrade(&seq.gt_masks, &deg).unwrap().iter().flatten() {
            assert!(p.is_probability());
        }
    }

    #[test]
    fn degradation_spec_validates() {
        let bad = DegradationSpec { flicker_prob: 1.5, ..DegradationSpec::none(0) };
        assert!(bad.validate().is_err());
        let bad = DegradationSpec { flicker_scale: 1.0, ..DegradationSpec::none(0) };
        assert!(bad.validate().is_err());
    }
}
