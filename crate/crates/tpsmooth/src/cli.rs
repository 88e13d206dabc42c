//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tpsmooth_core::flow::estimate_flow;
use tpsmooth_core::metrics::{evaluate_sequence, fill_uss, fill_uss_pooled, FrameMetrics, UssWeights};
use tpsmooth_core::smoother::{FusionMode, Smoother};
use tpsmooth_core::synth::{degrade, generate, presets, DegradationSpec, SceneSpec};
use tpsmooth_core::{threshold_mask, Error as CoreError, FlowField};

use crate::config::{RunConfig, SynthConfig, UssScope};
use crate::error::{AppError, AppResult};
use crate::io::layout::{self, RUN_CONFIG};
use crate::io::{manifest::FORMAT_VERSION, read_json, write_file, write_json, SequenceManifest};
use crate::{plot, report, verify};

#[derive(Debug, Parser)]
#[command(name = "tpsmooth", version, about = "Temporal smoothing of segmentation probability maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sequence with ground truth.
    Synth(SynthArgs),
    /// Estimate dense flow between consecutive frames.
    Flow(FlowArgs),
    /// Smooth a sequence's probability maps.
    Smooth(SmoothArgs),
    /// Compute per-frame stability metrics of a mask sequence.
    Eval(EvalArgs),
    /// Compare two evaluated runs.
    Compare(CompareArgs),
    /// Draw per-frame metric charts for two runs.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct FlowFlags {
    #[arg(long, default_value_t = 5)]
    pub pyramid_levels: usize,
    #[arg(long, default_value_t = 0.5)]
    pub pyramid_scale: f64,
    #[arg(long, default_value_t = 7)]
    pub window_radius: usize,
    #[arg(long, default_value_t = 3)]
    pub iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub poly_n: usize,
    #[arg(long, default_value_t = 1.1)]
    pub poly_sigma: f64,
}

impl FlowFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.flow.pyramid_levels = self.pyramid_levels;
        cfg.flow.pyramid_scale = self.pyramid_scale;
        cfg.flow.window_radius = self.window_radius;
        cfg.flow.iterations_per_level = self.iterations;
        cfg.flow.poly_neighborhood = self.poly_n;
        cfg.flow.poly_sigma = self.poly_sigma;
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "flicker-disk")]
    pub preset: String,
    /// JSON file with `scene` and `degradation` objects replacing the preset.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub logit_noise_std: Option<f64>,
    #[arg(long)]
    pub jitter_std: Option<f64>,
    #[arg(long)]
    pub flicker_prob: Option<f64>,
    #[arg(long)]
    pub flicker_scale: Option<f64>,
    #[arg(long)]
    pub dropout_prob: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Sequence directory with `manifest.json` and `frames/`.
    pub sequence: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write backward flows.
    #[arg(long)]
    pub bidirectional: bool,
    #[command(flatten)]
    pub flow: FlowFlags,
}

/// `adaptive`, `passthrough` or `fixed:<w>`.
pub fn parse_fusion_mode(s: &str) -> Result<FusionMode, String> {
    match s {
        "adaptive" => Ok(FusionMode::Adaptive),
        "passthrough" => Ok(FusionMode::Passthrough),
        _ => {
            let w = s
                .strip_prefix("fixed:")
                .ok_or_else(|| format!("expected adaptive, passthrough or fixed:<w>, got {s:?}"))?;
            w.parse::<f64>().map(FusionMode::Fixed).map_err(|_| format!("bad fixed weight {w:?}"))
        }
    }
}

/// Three comma-separated weights.
pub fn parse_weights(s: &str) -> Result<UssWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad weight {p:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [alpha, beta, gamma] => Ok(UssWeights { alpha, beta, gamma }),
        _ => Err(format!("expected three weights, got {}", parts.len())),
    }
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    pub sequence: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub kappa_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub kappa_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_floor: f64,
    /// Use `sigma_floor` as a fixed sigma instead of the median residual.
    #[arg(long)]
    pub fixed_sigma: bool,
    #[arg(long)]
    pub normalize_entropy: bool,
    #[arg(long, default_value = "adaptive", value_parser = parse_fusion_mode)]
    pub fusion_mode: FusionMode,
    #[arg(long)]
    pub disable_motion_uncertainty: bool,
    #[arg(long)]
    pub disable_entropy: bool,
    /// Check convexity and blend bounds on every frame.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub flow: FlowFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Run or sequence directory with `manifest.json`.
    pub run: PathBuf,
    /// Evaluate `gt/` masks instead of `masks/`.
    #[arg(long)]
    pub gt: bool,
    /// Sequence whose frames drive flow estimation (defaults to the run
    /// directory when it holds frames).
    #[arg(long)]
    pub sequence: Option<PathBuf>,
    /// Directory of precomputed forward `.flo` files.
    #[arg(long)]
    pub flow_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub boundary_tolerance: f64,
    #[arg(long, default_value = "0.4,0.3,0.3", value_parser = parse_weights)]
    pub uss_weights: UssWeights,
    #[command(flatten)]
    pub flow: FlowFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline `metrics.csv` or the eval directory holding it.
    pub baseline: PathBuf,
    /// Enhanced `metrics.csv` or the eval directory holding it.
    pub enhanced: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = UssScope::PerRun)]
    pub uss_scope: UssScope,
    #[arg(long, default_value = "0.4,0.3,0.3", value_parser = parse_weights)]
    pub uss_weights: UssWeights,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub baseline: PathBuf,
    pub enhanced: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Flow(a) => flow(a),
        Command::Smooth(a) => smooth(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn start(cfg: &RunConfig) -> AppResult<()> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| AppError::io(&cfg.output_dir, e))?;
    write_json(&cfg.output_dir.join(RUN_CONFIG), cfg)
}

#[derive(serde::Deserialize)]
struct SpecFile {
    scene: SceneSpec,
    degradation: DegradationSpec,
}

fn synth(a: SynthArgs) -> AppResult<()> {
    let (mut scene, mut deg) = match &a.spec {
        Some(path) => {
            let s: SpecFile = read_json(path)?;
            (s.scene, s.degradation)
        }
        None => presets::by_name(&a.preset, a.seed).ok_or_else(|| {
            AppError::Config(format!("unknown preset {:?}; known: {}", a.preset, presets::NAMES.join(", ")))
        })?,
    };
    if a.spec.is_some() {
        deg.seed = a.seed;
    }
    scene.frame_count = a.frames.unwrap_or(scene.frame_count);
    scene.width = a.width.unwrap_or(scene.width);
    scene.height = a.height.unwrap_or(scene.height);
    deg.logit_noise_std = a.logit_noise_std.unwrap_or(deg.logit_noise_std);
    deg.jitter_std = a.jitter_std.unwrap_or(deg.jitter_std);
    deg.flicker_prob = a.flicker_prob.unwrap_or(deg.flicker_prob);
    deg.flicker_scale = a.flicker_scale.unwrap_or(deg.flicker_scale);
    deg.dropout_prob = a.dropout_prob.unwrap_or(deg.dropout_prob);

    let mut cfg = RunConfig::new("synth", a.out.clone());
    cfg.seed = Some(a.seed);
    cfg.inputs = a.spec.iter().cloned().collect();
    let preset = if a.spec.is_some() { "custom".to_string() } else { a.preset.clone() };
    cfg.synth = Some(SynthConfig { preset: preset.clone(), scene: scene.clone(), degradation: deg, fps: a.fps });
    start(&cfg)?;

    let seq = generate(&scene)?;
    let probs = degrade(&seq.gt_masks, &deg)?;
    let ids: Vec<u32> = (1..=scene.shapes.len() as u32).collect();
    let manifest = SequenceManifest {
        format_version: FORMAT_VERSION,
        width: scene.width,
        height: scene.height,
        frame_count: scene.frame_count,
        object_ids: ids.clone(),
        fps: a.fps,
        source: format!("synth preset={preset} seed={}", a.seed),
    };
    layout::write_manifest(&a.out, &manifest)?;
    for (t, ((frame, p), gt)) in seq.frames.iter().zip(&probs).zip(&seq.gt_masks).enumerate() {
        layout::write_frame(&a.out, t, frame)?;
        layout::write_probs(&a.out, t, p)?;
        layout::write_masks(&a.out, "gt", t, &ids, gt)?;
    }
    for (t, f) in seq.gt_flow.iter().enumerate() {
        layout::write_flow(&layout::flow_path(&a.out.join("gt_flow"), t), f)?;
    }
    #[derive(serde::Serialize)]
    struct SceneFile<'a> {
        scene: &'a SceneSpec,
        degradation: &'a DegradationSpec,
    }
    write_json(&a.out.join("scene.json"), &SceneFile { scene: &scene, degradation: &deg })
}

fn flow(a: FlowArgs) -> AppResult<()> {
    let mut cfg = RunConfig::new("flow", a.out.clone());
    a.flow.apply(&mut cfg);
    cfg.inputs = vec![a.sequence.clone()];
    cfg.bidirectional_flow = a.bidirectional;
    let manifest = layout::read_manifest(&a.sequence)?;
    start(&cfg)?;
    let mut prev = layout::read_frame(&a.sequence, 0, &manifest)?;
    for t in 1..manifest.frame_count {
        let cur = layout::read_frame(&a.sequence, t, &manifest)?;
        layout::write_flow(&layout::flow_path(&a.out, t - 1), &estimate_flow(&prev, &cur, &cfg.flow)?)?;
        if a.bidirectional {
            layout::write_flow(&layout::backward_flow_path(&a.out, t - 1), &estimate_flow(&cur, &prev, &cfg.flow)?)?;
        }
        prev = cur;
    }
    Ok(())
}

fn smooth(a: SmoothArgs) -> AppResult<()> {
    let mut cfg = RunConfig::new("smooth", a.out.clone());
    a.flow.apply(&mut cfg);
    cfg.inputs = vec![a.sequence.clone()];
    cfg.fusion.kappa_min = a.kappa_min;
    cfg.fusion.kappa_max = a.kappa_max;
    cfg.fusion.epsilon = a.epsilon;
    cfg.fusion.normalize_entropy = a.normalize_entropy;
    cfg.fusion.mode = a.fusion_mode;
    cfg.fusion.disable_motion_uncertainty = a.disable_motion_uncertainty;
    cfg.fusion.disable_entropy = a.disable_entropy;
    cfg.motion.sigma_floor = a.sigma_floor;
    cfg.motion.use_adaptive_sigma = !a.fixed_sigma;
    cfg.threshold = a.threshold;
    cfg.verify = a.verify;
    let manifest = layout::read_manifest(&a.sequence)?;
    start(&cfg)?;

    let mut out_manifest = manifest.clone();
    out_manifest.source = format!("smooth of {}", a.sequence.display());
    layout::write_manifest(&a.out, &out_manifest)?;
    let mut smoother = Smoother::new(cfg.smoother_params())?;
    let mut diag_csv = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| AppError::Config(format!("csv encoding: {e}"));
    diag_csv
        .write_record(["frame", "object", "flow_mag", "sigma", "mean_residual", "mean_q", "mean_k"])
        .map_err(csv_err)?;
    for t in 0..manifest.frame_count {
        let frame = layout::read_frame(&a.sequence, t, &manifest)?;
        let probs = layout::read_probs(&a.sequence, t, &manifest)?;
        let (refined, diag) = smoother.push(frame, &probs)?;
        if a.verify {
            verify::check_step(&probs, &refined, &diag, &cfg.fusion).map_err(AppError::Verify)?;
        }
        let masks = refined.iter().map(|p| threshold_mask(p, cfg.threshold)).collect::<Result<Vec<_>, _>>()?;
        layout::write_probs(&a.out, t, &refined)?;
        layout::write_masks(&a.out, "masks", t, &manifest.object_ids, &masks)?;
        let opt = |v: Option<f64>| v.map(|x| report::sig6(x).to_string()).unwrap_or_default();
        for (k, &id) in manifest.object_ids.iter().enumerate() {
            diag_csv
                .write_record([
                    t.to_string(),
                    id.to_string(),
                    opt(diag.flow_magnitude),
                    opt(diag.sigma),
                    opt(diag.residual.as_ref().map(|r| r.mean())),
                    opt(diag.motion_uncertainty.as_ref().map(|q| q.mean())),
                    opt(diag.blend.get(k).map(|b| b.mean())),
                ])
                .map_err(csv_err)?;
        }
    }
    let bytes = diag_csv.into_inner().map_err(|e| AppError::Config(format!("csv encoding: {e}")))?;
    write_file(&a.out.join("diagnostics.csv"), &bytes)
}

fn estimate_flows(dir: &Path, manifest: &SequenceManifest, cfg: &RunConfig) -> AppResult<Vec<FlowField>> {
    let mut prev = layout::read_frame(dir, 0, manifest)?;
    let mut flows = Vec::with_capacity(manifest.frame_count.saturating_sub(1));
    for t in 1..manifest.frame_count {
        let cur = layout::read_frame(dir, t, manifest)?;
        flows.push(estimate_flow(&prev, &cur, &cfg.flow)?);
        prev = cur;
    }
    Ok(flows)
}

fn eval(a: EvalArgs) -> AppResult<()> {
    let mut cfg = RunConfig::new("eval", a.out.clone());
    a.flow.apply(&mut cfg);
    cfg.boundary_tolerance = a.boundary_tolerance;
    cfg.uss_weights = a.uss_weights;
    cfg.inputs = std::iter::once(a.run.clone()).chain(a.sequence.clone()).chain(a.flow_dir.clone()).collect();
    let manifest = layout::read_manifest(&a.run)?;
    if manifest.frame_count < 2 {
        return Err(CoreError::InvalidInput("evaluation needs at least two frames".into()).into());
    }
    start(&cfg)?;
    let masks = layout::read_masks(&a.run, if a.gt { "gt" } else { "masks" }, &manifest)?;
    let flows = match (&a.flow_dir, &a.sequence) {
        (Some(dir), _) => layout::read_flows(dir, &manifest)?,
        (None, Some(seq)) => {
            let seq_manifest = layout::read_manifest(seq)?;
            if (seq_manifest.width, seq_manifest.height, seq_manifest.frame_count)
                != (manifest.width, manifest.height, manifest.frame_count)
            {
                return Err(CoreError::InvalidInput("sequence and run manifests disagree".into()).into());
            }
            estimate_flows(seq, &manifest, &cfg)?
        }
        (None, None) if layout::frame_path(&a.run, 0).is_file() => estimate_flows(&a.run, &manifest, &cfg)?,
        (None, None) => {
            return Err(AppError::Config("no flow source: pass --sequence or --flow-dir".into()));
        }
    };
    let records = evaluate_sequence(&masks, &manifest.object_ids, &flows, &cfg.eval_params())?;
    report::write_csv(&a.out.join("metrics.csv"), &records)?;
    write_json(&a.out.join("summary.json"), &report::eval_summary(&records)?)
}

fn metrics_table(path: &Path) -> AppResult<Vec<FrameMetrics>> {
    if path.is_dir() {
        report::read_csv(&path.join("metrics.csv"))
    } else {
        report::read_csv(path)
    }
}

fn compare(a: CompareArgs) -> AppResult<()> {
    let mut cfg = RunConfig::new("compare", a.out.clone());
    cfg.uss_scope = a.uss_scope;
    cfg.uss_weights = a.uss_weights;
    cfg.inputs = vec![a.baseline.clone(), a.enhanced.clone()];
    cfg.validate()?;
    let base = metrics_table(&a.baseline)?;
    let enh = metrics_table(&a.enhanced)?;
    start(&cfg)?;
    let (base, enh) = match a.uss_scope {
        UssScope::PerRun => (fill_uss(base, &a.uss_weights)?, fill_uss(enh, &a.uss_weights)?),
        UssScope::Pooled => fill_uss_pooled(base, enh, &a.uss_weights)?,
    };
    let rep = report::compare(&base, &enh, a.uss_scope)?;
    report::write_csv(&a.out.join("baseline_metrics.csv"), &base)?;
    report::write_csv(&a.out.join("enhanced_metrics.csv"), &enh)?;
    write_json(&a.out.join("compare.json"), &rep)
}

fn plot_cmd(a: PlotArgs) -> AppResult<()> {
    let mut cfg = RunConfig::new("plot", a.out.clone());
    cfg.inputs = vec![a.baseline.clone(), a.enhanced.clone()];
    cfg.validate()?;
    let base = metrics_table(&a.baseline)?;
    let enh = metrics_table(&a.enhanced)?;
    start(&cfg)?;
    for (name, svg) in plot::render_all(&base, &enh)? {
        write_file(&a.out.join(name), svg.as_bytes())?;
    }
    Ok(())
}
