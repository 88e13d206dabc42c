//! Temporal-stability metrics, per-object evaluation and object-then-time
//! aggregation.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::flow::{mean_flow_magnitude, warp_backward};
use crate::grid::{same_dims, FlowField, Mask};
use crate::numeric::median;

pub mod boundary;
pub mod uss;

pub use boundary::{boundary_f, extract_boundary, squared_distance_transform};
pub use uss::{robust_normalize, uss_series, uss_series_pooled, RobustScale, UssInputs, UssWeights};

/// Default boundary match tolerance in pixels.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 2.0;

/// Intersection over union. Two empty masks score 1, exactly one empty
/// scores 0.
pub fn mask_iou(a: &Mask, b: &Mask) -> Result<f64> {
    same_dims(a.dims(), b.dims())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Consecutive-frame IoU without motion compensation.
pub fn temporal_iou(m_t: &Mask, m_prev: &Mask) -> Result<f64> {
    mask_iou(m_t, m_prev)
}

/// IoU after backward-warping `m_prev` along `flow` and re-binarizing at 0.5.
pub fn warped_iou(m_t: &Mask, m_prev: &Mask, flow: &FlowField) -> Result<f64> {
    same_dims(m_t.dims(), m_prev.dims())?;
    let warped = warp_backward(&m_prev.to_field(), flow)?;
    let (w, h) = warped.dims();
    let aligned = Mask::new(w, h, warped.data().iter().map(|&v| v > 0.5).collect())?;
    mask_iou(m_t, &aligned)
}

/// 1 when the mask has no foreground pixel.
pub fn dropout_indicator(mask: &Mask) -> u8 {
    mask.is_blank() as u8
}

/// One per-frame, per-object row of the metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub frame_index: usize,
    pub object_id: u32,
    pub tiou: f64,
    pub wiou: f64,
    pub boundary_f: f64,
    pub dropout: u8,
    pub flow_mag: f64,
    /// Filled by the normalization pass.
    pub uss: f64,
}

/// Settings for [`evaluate_sequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalParams {
    pub boundary_tolerance: f64,
    pub weights: UssWeights,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE, weights: UssWeights::default() }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !self.boundary_tolerance.is_finite() || self.boundary_tolerance < 0.0 {
            return Err(Error::config("boundary tolerance must be a finite value >= 0"));
        }
        self.weights.validate()
    }
}

/// Computes pairwise metrics for frames `1..T` of every object.
///
/// `masks` is indexed `[frame][object]`; `flows[t - 1]` aligns frame `t - 1`
/// to frame `t`. USS is filled per object against that object's own series.
pub fn evaluate_sequence(
    masks: &[Vec<Mask>],
    object_ids: &[u32],
    flows: &[FlowField],
    params: &EvalParams,
) -> Result<Vec<FrameMetrics>> {
    let records = pairwise_records(masks, object_ids, flows, params)?;
    fill_uss(records, &params.weights)
}

/// Pairwise metrics without the USS pass (`uss` left at 0).
pub fn pairwise_records(
    masks: &[Vec<Mask>],
    object_ids: &[u32],
    flows: &[FlowField],
    params: &EvalParams,
) -> Result<Vec<FrameMetrics>> {
    params.validate()?;
    if masks.len() < 2 {
        return Err(Error::invalid("pairwise metrics need at least two frames"));
    }
    if flows.len() != masks.len() - 1 {
        return Err(Error::invalid(format!(
            "{} frames need {} flow fields, got {}",
            masks.len(),
            masks.len() - 1,
            flows.len()
        )));
    }
    if object_ids.is_empty() {
        return Err(Error::invalid("no objects to evaluate"));
    }
    if let Some(t) = masks.iter().position(|m| m.len() != object_ids.len()) {
        return Err(Error::invalid(format!("frame {t} has {} masks for {} objects", masks[t].len(), object_ids.len())));
    }
    let mut records = Vec::with_capacity((masks.len() - 1) * object_ids.len());
    for t in 1..masks.len() {
        let flow = &flows[t - 1];
        let flow_mag = mean_flow_magnitude(flow);
        for (k, &id) in object_ids.iter().enumerate() {
            let (cur, prev) = (&masks[t][k], &masks[t - 1][k]);
            records.push(FrameMetrics {
                frame_index: t,
                object_id: id,
                tiou: temporal_iou(cur, prev)?,
                wiou: warped_iou(cur, prev, flow)?,
                boundary_f: boundary_f(cur, prev, params.boundary_tolerance)?,
                dropout: dropout_indicator(cur),
                flow_mag,
                uss: 0.0,
            });
        }
    }
    Ok(records)
}

fn object_ids_in(records: &[FrameMetrics]) -> Vec<u32> {
    let mut ids: Vec<u32> = records.iter().map(|r| r.object_id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

fn uss_inputs(records: &[FrameMetrics], id: u32) -> (Vec<usize>, UssInputs) {
    let mut idx = Vec::new();
    let mut inputs = UssInputs::default();
    for (i, r) in records.iter().enumerate().filter(|(_, r)| r.object_id == id) {
        idx.push(i);
        inputs.wiou.push(r.wiou);
        inputs.boundary_f.push(r.boundary_f);
        inputs.dropout.push(r.dropout as f64);
    }
    (idx, inputs)
}

/// Fills `uss` per object, normalizing each object's series on its own.
pub fn fill_uss(mut records: Vec<FrameMetrics>, weights: &UssWeights) -> Result<Vec<FrameMetrics>> {
    if records.is_empty() {
        return Err(Error::invalid("no metric records"));
    }
    for id in object_ids_in(&records) {
        let (idx, inputs) = uss_inputs(&records, id);
        for (i, u) in idx.into_iter().zip(uss_series(&inputs, weights)?) {
            records[i].uss = u;
        }
    }
    Ok(records)
}

/// Fills `uss` in two runs with statistics pooled across both runs, per
/// object.
pub fn fill_uss_pooled(
    mut a: Vec<FrameMetrics>,
    mut b: Vec<FrameMetrics>,
    weights: &UssWeights,
) -> Result<(Vec<FrameMetrics>, Vec<FrameMetrics>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("no metric records"));
    }
    let ids = object_ids_in(&a);
    if ids != object_ids_in(&b) {
        return Err(Error::invalid("runs track different objects"));
    }
    for id in ids {
        let (ia, xa) = uss_inputs(&a, id);
        let (ib, xb) = uss_inputs(&b, id);
        let (ua, ub) = uss_series_pooled(&xa, &xb, weights)?;
        for (i, u) in ia.into_iter().zip(ua) {
            a[i].uss = u;
        }
        for (i, u) in ib.into_iter().zip(ub) {
            b[i].uss = u;
        }
    }
    Ok((a, b))
}

/// Whether larger or smaller values indicate a more stable result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Higher,
    Lower,
    /// Descriptive only, e.g. scene motion.
    Neutral,
}

/// Columns of the metric table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    TemporalIou,
    WarpedIou,
    BoundaryF,
    Dropout,
    FlowMagnitude,
    Uss,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::TemporalIou,
        Metric::WarpedIou,
        Metric::BoundaryF,
        Metric::Dropout,
        Metric::FlowMagnitude,
        Metric::Uss,
    ];

    /// Column name used in CSV and JSON reports.
    pub fn name(self) -> &'static str {
        match self {
            Metric::TemporalIou => "tiou",
            Metric::WarpedIou => "wiou",
            Metric::BoundaryF => "boundary_f",
            Metric::Dropout => "dropout",
            Metric::FlowMagnitude => "flow_mag",
            Metric::Uss => "uss",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Dropout => Direction::Lower,
            Metric::FlowMagnitude => Direction::Neutral,
            _ => Direction::Higher,
        }
    }

    pub fn value(self, r: &FrameMetrics) -> f64 {
        match self {
            Metric::TemporalIou => r.tiou,
            Metric::WarpedIou => r.wiou,
            Metric::BoundaryF => r.boundary_f,
            Metric::Dropout => r.dropout as f64,
            Metric::FlowMagnitude => r.flow_mag,
            Metric::Uss => r.uss,
        }
    }
}

/// Unweighted mean over objects for every frame, in frame order. Returns
/// `(frame_index, value)` pairs.
pub fn per_frame_means(records: &[FrameMetrics], metric: Metric) -> Result<Vec<(usize, f64)>> {
    if records.is_empty() {
        return Err(Error::invalid("no metric records"));
    }
    let mut frames: Vec<usize> = records.iter().map(|r| r.frame_index).collect();
    frames.sort_unstable();
    frames.dedup();
    Ok(frames
        .into_iter()
        .map(|f| {
            let (sum, n) = records
                .iter()
                .filter(|r| r.frame_index == f)
                .fold((0.0, 0usize), |(s, n), r| (s + metric.value(r), n + 1));
            (f, sum / n as f64)
        })
        .collect())
}

/// Mean, population standard deviation and median of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSummary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub count: usize,
}

impl SeriesSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot summarize an empty series"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(SeriesSummary {
            mean,
            std: libm::sqrt(var),
            median: median(values.iter().copied()).expect("nonempty"),
            count: values.len(),
        })
    }
}

/// Object-then-time summary of one metric.
pub fn summarize(records: &[FrameMetrics], metric: Metric) -> Result<SeriesSummary> {
    let series: Vec<f64> = per_frame_means(records, metric)?.into_iter().map(|(_, v)| v).collect();
    SeriesSummary::of(&series)
}

/// Percentage of paired frames on which `enhanced` is strictly better than
/// `baseline` under `direction`. Neutral metrics count strict increases.
pub fn improved_pct(baseline: &[f64], enhanced: &[f64], direction: Direction) -> Result<f64> {
    if baseline.len() != enhanced.len() {
        return Err(Error::invalid(format!("paired series lengths differ: {} vs {}", baseline.len(), enhanced.len())));
    }
    if baseline.is_empty() {
        return Err(Error::invalid("cannot compare empty series"));
    }
    let better = baseline
        .iter()
        .zip(enhanced)
        .filter(|(b, e)| match direction {
            Direction::Lower => e < b,
            Direction::Higher | Direction::Neutral => e > b,
        })
        .count();
    Ok(100.0 * better as f64 / baseline.len() as f64)
}

/// Median of the per-frame series, exposed for report tables.
pub fn series_median(values: &[f64]) -> Option<f64> {
    median(values.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn rect(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> Mask {
        Mask::from_fn(w, h, |x, y| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = rect(10, 10, 2, 2, 3, 3);
        assert_eq!(temporal_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(temporal_iou(&a, &rect(10, 10, 6, 6, 3, 3)).unwrap(), 0.0);
        // Two 2x3 blocks overlapping in one 1x3 column.
        let p = Mask::from_fn(6, 6, |x, y| x < 2 && y < 3).unwrap();
        let b6 = Mask::from_fn(6, 6, |x, y| (1..3).contains(&x) && y < 3).unwrap();
        assert_eq!(b6.area(), 6);
        assert_eq!(temporal_iou(&p, &b6).unwrap(), 3.0 / 9.0);
        let e = Mask::empty(10, 10).unwrap();
        assert_eq!(temporal_iou(&e, &e).unwrap(), 1.0);
        assert_eq!(temporal_iou(&a, &e).unwrap(), 0.0);
        assert!(temporal_iou(&a, &Mask::empty(9, 10).unwrap()).is_err());
    }

    #[test]
    fn warped_iou_examples() {
        let prev = rect(20, 20, 4, 6, 5, 5);
        let cur = rect(20, 20, 7, 6, 5, 5);
        assert_eq!(
            warped_iou(&cur, &prev, &FlowField::zeros(20, 20).unwrap()).unwrap(),
            temporal_iou(&cur, &prev).unwrap()
        );
        assert_eq!(warped_iou(&cur, &prev, &FlowField::constant(20, 20, 3.0, 0.0).unwrap()).unwrap(), 1.0);
        let out = FlowField::constant(20, 20, 40.0, 0.0).unwrap();
        assert_eq!(warped_iou(&cur, &prev, &out).unwrap(), 0.0);
    }

    #[test]
    fn dropout_examples() {
        assert_eq!(dropout_indicator(&Mask::empty(3, 3).unwrap()), 1);
        assert_eq!(dropout_indicator(&Mask::from_fn(3, 3, |x, y| x == 1 && y == 1).unwrap()), 0);
    }

    fn record(frame: usize, id: u32, v: f64) -> FrameMetrics {
        FrameMetrics {
            frame_index: frame,
            object_id: id,
            tiou: v,
            wiou: v,
            boundary_f: v,
            dropout: 0,
            flow_mag: 1.0,
            uss: 0.0,
        }
    }

    #[test]
    fn aggregation_examples() {
        let constant: Vec<_> = (1..8).map(|t| record(t, 1, 0.7)).collect();
        let s = summarize(&constant, Metric::TemporalIou).unwrap();
        assert!((s.mean - 0.7).abs() < 1e-15 && s.std < 1e-15);
        assert_eq!((s.median, s.count), (0.7, 7));

        let two: Vec<_> = (1..4).flat_map(|t| [record(t, 1, 0.2), record(t, 2, 0.6)]).collect();
        for (_, v) in per_frame_means(&two, Metric::BoundaryF).unwrap() {
            assert!((v - 0.4).abs() < 1e-15);
        }
        assert!(summarize(&[], Metric::Uss).is_err());

        let base = [0.5; 10];
        let mut enh = [0.6; 10];
        enh[3] = 0.4;
        assert_eq!(improved_pct(&base, &enh, Direction::Higher).unwrap(), 90.0);
        assert_eq!(improved_pct(&base, &enh, Direction::Lower).unwrap(), 10.0);
        assert!(improved_pct(&base, &enh[..9], Direction::Higher).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = SeriesSummary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - libm::sqrt(1.25)).abs() < 1e-15);
        assert_eq!(s.median, 2.5);
    }

    #[test]
    fn evaluate_fills_records_and_uss() {
        let masks: Vec<Vec<Mask>> = (0..5).map(|t| vec![rect(24, 24, 3 + t, 5, 6, 6)]).collect();
        let flows: Vec<FlowField> = (0..4).map(|_| FlowField::constant(24, 24, 1.0, 0.0).unwrap()).collect();
        let recs = evaluate_sequence(&masks, &[7], &flows, &EvalParams::default()).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert_eq!(r.object_id, 7);
            assert_eq!(r.wiou, 1.0);
            assert!((r.tiou - 30.0 / 42.0).abs() < 1e-15);
            assert_eq!(r.dropout, 0);
            assert_eq!(r.flow_mag, 1.0);
            assert!((r.uss - 0.5).abs() < 1e-15);
        }
        assert!(evaluate_sequence(&masks[..1], &[7], &[], &EvalParams::default()).is_err());
        assert!(evaluate_sequence(&masks, &[7], &flows[..3], &EvalParams::default()).is_err());
        assert!(evaluate_sequence(&masks, &[7, 8], &flows, &EvalParams::default()).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(Metric::from_name(m.name()), Some(m));
        }
        assert_eq!(Metric::Dropout.direction(), Direction::Lower);
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in proptest::collection::vec(any::<bool>(), 36), b in proptest::collection::vec(any::<bool>(), 36)) {
            let (a, b) = (Mask::new(6, 6, a).unwrap(), Mask::new(6, 6, b).unwrap());
            let ab = temporal_iou(&a, &b).unwrap();
            prop_assert_eq!(ab, temporal_iou(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(warped_iou(&a, &b, &FlowField::zeros(6, 6).unwrap()).unwrap(), ab);
        }
    }
}
