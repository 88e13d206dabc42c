//! Generator, smoother and metrics wired together.

use std::f64::consts::PI;

use tpsmooth_core::metrics::{dropout_indicator, evaluate_sequence, summarize, EvalParams, Metric};
use tpsmooth_core::smoother::{run_sequence, FusionMode, SmootherParams};
use tpsmooth_core::synth::{
    degrade, dropout_schedule, generate, presets, DegradationSpec, ShapeKind, ShapeSpec, Trajectory,
};
use tpsmooth_core::threshold_mask;

fn lens_iou(r: f64, d: f64) -> f64 {
    let inter = 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt();
    inter / (2.0 * PI * r * r - inter)
}

#[test]
fn undegraded_disk_tiou_matches_circle_overlap() {
    let (mut scene, _) = presets::flicker_disk(4);
    scene.width = 96;
    scene.frame_count = 6;
    scene.shapes = vec![ShapeSpec {
        kind: ShapeKind::Disk { radius: 14.0 },
        trajectory: Trajectory::Linear { start: (24.0, 32.0), velocity: (3.0, 0.0) },
    }];
    let seq = generate(&scene).unwrap();
    let probs = degrade(&seq.gt_masks, &DegradationSpec::none(4)).unwrap();
    let masks: Vec<Vec<_>> =
        probs.iter().map(|f| f.iter().map(|p| threshold_mask(p, 0.5).unwrap()).collect()).collect();
    assert_eq!(masks, seq.gt_masks);
    let recs = evaluate_sequence(&masks, &[1], &seq.gt_flow, &EvalParams::default()).unwrap();
    let expected = lens_iou(14.0, 3.0);
    for r in &recs {
        assert!((r.tiou - expected).abs() < 0.02, "tIoU {} vs {expected}", r.tiou);
        assert!(r.wiou > r.tiou);
    }
}

#[test]
fn scheduled_dropout_frames_are_empty() {
    let (scene, mut deg) = presets::flicker_disk(42);
    deg.dropout_prob = 0.05;
    let seq = generate(&scene).unwrap();
    let probs = degrade(&seq.gt_masks, &deg).unwrap();
    let schedule = dropout_schedule(&deg, scene.frame_count, 1);
    let dropped: Vec<usize> = (0..scene.frame_count).filter(|&t| schedule[t][0]).collect();
    assert!(!dropped.is_empty());
    for t in dropped {
        assert_eq!(dropout_indicator(&threshold_mask(&probs[t][0], 0.5).unwrap()), 1);
    }
}

#[test]
fn hundred_frames_at_five_percent_dropout() {
    let (mut scene, mut deg) = presets::static_disk(42);
    scene.frame_count = 100;
    deg.dropout_prob = 0.05;
    let count = dropout_schedule(&deg, 100, 1).iter().filter(|f| f[0]).count();
    assert!((1..=12).contains(&count), "{count}");
    assert_eq!(count, dropout_schedule(&deg, 100, 1).iter().filter(|f| f[0]).count());
}

#[test]
fn smoothing_improves_stability_on_flicker_preset() {
    let (scene, deg) = presets::flicker_disk(42);
    let seq = generate(&scene).unwrap();
    let probs = degrade(&seq.gt_masks, &deg).unwrap();
    let mean = |mode| {
        let params = SmootherParams {
            fusion: tpsmooth_core::smoother::FusionParams { mode, ..Default::default() },
            ..Default::default()
        };
        let out = run_sequence(&seq.frames, &probs, &params, 0.5).unwrap();
        let recs = evaluate_sequence(&out.masks, &[1], &seq.gt_flow, &EvalParams::default()).unwrap();
        (summarize(&recs, Metric::TemporalIou).unwrap().mean, summarize(&recs, Metric::WarpedIou).unwrap().mean)
    };
    let (base_t, base_w) = mean(FusionMode::Passthrough);
    let (fixed_t, _) = mean(FusionMode::Fixed(0.5));
    let (adapt_t, adapt_w) = mean(FusionMode::Adaptive);
    assert!(adapt_t > base_t && adapt_w > base_w);
    assert!(fixed_t > base_t);
}

#[test]
fn generation_is_deterministic() {
    let (scene, deg) = presets::flicker_disk(42);
    let a = degrade(&generate(&scene).unwrap().gt_masks, &deg).unwrap();
    let b = degrade(&generate(&scene).unwrap().gt_masks, &deg).unwrap();
    assert_eq!(a, b);
}
