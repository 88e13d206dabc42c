//! Dense flow against analytic ground truth.

use tpsmooth_core::flow::{estimate_flow, flow_residual, warp_backward, FlowParams};
use tpsmooth_core::synth::{generate, presets, translation_pair, ShapeKind, ShapeSpec, Trajectory};
use tpsmooth_core::{FlowField, Mask};

const SIZE: usize = 96;
const MARGIN: usize = 16;

fn interior_epe(flow: &FlowField, truth: (f64, f64)) -> f64 {
    let mut sum = 0.0;
    let mut n = 0.0;
    for y in MARGIN..SIZE - MARGIN {
        for x in MARGIN..SIZE - MARGIN {
            let (u, v) = flow.at(x, y);
            sum += (u - truth.0).hypot(v - truth.1);
            n += 1.0;
        }
    }
    sum / n
}

#[test]
fn translation_pairs_are_recovered() {
    let params = FlowParams::default();
    for speed in 1..=4 {
        for seed in 0..5u64 {
            let angle = seed as f64 * 1.1;
            let shift = (speed as f64 * angle.cos(), speed as f64 * angle.sin());
            let (a, b) = translation_pair(SIZE, SIZE, shift, seed).unwrap();
            let epe = interior_epe(&estimate_flow(&a, &b, &params).unwrap(), shift);
            assert!(epe < 0.25, "speed {speed} seed {seed}: EPE {epe}");
        }
    }
}

#[test]
fn identity_pairs_give_near_zero_flow() {
    for seed in 0..5u64 {
        let (a, b) = translation_pair(SIZE, SIZE, (0.0, 0.0), seed).unwrap();
        let flow = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        assert!(interior_epe(&flow, (0.0, 0.0)) < 0.05);
    }
}

#[test]
fn forward_backward_cycle_is_consistent_on_translation() {
    let (a, b) = translation_pair(SIZE, SIZE, (2.0, -1.0), 3).unwrap();
    let params = FlowParams::default();
    let fwd = estimate_flow(&a, &b, &params).unwrap();
    let bwd = estimate_flow(&b, &a, &params).unwrap();
    let e = flow_residual(&fwd, &bwd).unwrap();
    let mut sum = 0.0;
    for y in MARGIN..SIZE - MARGIN {
        for x in MARGIN..SIZE - MARGIN {
            sum += e.get(x, y);
        }
    }
    let mean = sum / ((SIZE - 2 * MARGIN) * (SIZE - 2 * MARGIN)) as f64;
    assert!(mean < 0.25, "mean residual {mean}");
}

#[test]
fn generated_shape_motion_is_recovered_inside_the_shape() {
    let (mut scene, _) = presets::translate_rect(5);
    scene.width = SIZE;
    scene.height = SIZE;
    scene.frame_count = 4;
    scene.shapes = vec![ShapeSpec {
        kind: ShapeKind::Rectangle { half_width: 18.0, half_height: 16.0 },
        trajectory: Trajectory::Linear { start: (36.0, 46.0), velocity: (3.0, 1.0) },
    }];
    let seq = generate(&scene).unwrap();
    for t in 1..scene.frame_count {
        let flow = estimate_flow(&seq.frames[t - 1], &seq.frames[t], &FlowParams::default()).unwrap();
        let gt = &seq.gt_flow[t - 1];
        let core = erode(&seq.gt_masks[t - 1][0], 6);
        let (mut sum, mut n) = (0.0, 0.0);
        for y in 0..SIZE {
            for x in 0..SIZE {
                if core.get(x, y) {
                    let ((u, v), (gu, gv)) = (flow.at(x, y), gt.at(x, y));
                    sum += (u - gu).hypot(v - gv);
                    n += 1.0;
                }
            }
        }
        assert!(n > 100.0);
        assert!(sum / n < 0.25, "frame {t}: EPE {}", sum / n);
    }
}

#[test]
fn warping_with_estimated_flow_aligns_frames() {
    let (a, b) = translation_pair(SIZE, SIZE, (2.0, 1.0), 9).unwrap();
    let flow = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
    let prev = tpsmooth_core::ScalarField::new(SIZE, SIZE, a.data().to_vec()).unwrap();
    let warped = warp_backward(&prev, &flow).unwrap();
    let mut err = 0.0;
    for y in MARGIN..SIZE - MARGIN {
        for x in MARGIN..SIZE - MARGIN {
            err += (warped.get(x, y) - b.data()[y * SIZE + x]).abs();
        }
    }
    let mean = err / ((SIZE - 2 * MARGIN) * (SIZE - 2 * MARGIN)) as f64;
    assert!(mean < 2.0, "mean abs intensity error {mean}");
}

fn erode(mask: &Mask, r: usize) -> Mask {
    let (w, h) = mask.dims();
    Mask::from_fn(w, h, |x, y| {
        x >= r
            && y >= r
            && x + r < w
            && y + r < h
            && (y - r..=y + r).all(|yy| (x - r..=x + r).all(|xx| mask.get(xx, yy)))
    })
    .unwrap()
}
