//! Per-frame CSV tables and JSON summaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use tpsmooth_core::metrics::{
    improved_pct, per_frame_means, series_median, Direction, FrameMetrics, Metric, SeriesSummary,
};
use tpsmooth_core::stats::{wilcoxon_signed_rank, PValueMethod, PairedSample};

use crate::config::UssScope;
use crate::error::{AppError, AppResult};
use crate::io::write_file;

pub const CSV_HEADER: [&str; 8] = ["frame", "object", "tiou", "wiou", "boundary_f", "dropout", "flow_mag", "uss"];

/// Rounds to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Higher => "higher",
        Direction::Lower => "lower",
        Direction::Neutral => "neutral",
    }
}

pub fn encode_csv(records: &[FrameMetrics]) -> AppResult<Vec<u8>> {
    if records.is_empty() {
        return Err(AppError::Core(tpsmooth_core::Error::InvalidInput("no metric records to write".into())));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| AppError::Config(format!("csv encoding: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.frame_index.to_string(),
            r.object_id.to_string(),
            sig6(r.tiou).to_string(),
            sig6(r.wiou).to_string(),
            sig6(r.boundary_f).to_string(),
            r.dropout.to_string(),
            sig6(r.flow_mag).to_string(),
            sig6(r.uss).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| AppError::Config(format!("csv encoding: {e}")))
}

pub fn write_csv(path: &Path, records: &[FrameMetrics]) -> AppResult<()> {
    write_file(path, &encode_csv(records)?)
}

/// Reads a per-frame table. Columns may appear in any order; all eight are
/// required.
pub fn read_csv(path: &Path) -> AppResult<Vec<FrameMetrics>> {
    let bytes = crate::io::read_file(path)?;
    let schema = |m: String| AppError::schema(path, m);
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| schema(format!("unreadable header: {e}")))?.clone();
    let mut col = [0usize; 8];
    for (slot, name) in col.iter_mut().zip(CSV_HEADER) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| schema(format!("missing column `{name}`")))?;
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| schema(format!("line {line}: {e}")))?;
        let field = |k: usize| -> AppResult<&str> {
            row.get(col[k]).ok_or_else(|| schema(format!("line {line}: missing `{}`", CSV_HEADER[k])))
        };
        let num = |k: usize| -> AppResult<f64> {
            let s = field(k)?;
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| schema(format!("line {line}: `{}` is not a number: {s:?}", CSV_HEADER[k])))
        };
        let int = |k: usize| -> AppResult<u64> {
            let s = field(k)?;
            s.parse::<u64>().map_err(|_| schema(format!("line {line}: `{}` is not an integer: {s:?}", CSV_HEADER[k])))
        };
        let dropout = int(5)?;
        if dropout > 1 {
            return Err(schema(format!("line {line}: dropout must be 0 or 1")));
        }
        out.push(FrameMetrics {
            frame_index: int(0)? as usize,
            object_id: u32::try_from(int(1)?).map_err(|_| schema(format!("line {line}: object id too large")))?,
            tiou: num(2)?,
            wiou: num(3)?,
            boundary_f: num(4)?,
            dropout: dropout as u8,
            flow_mag: num(6)?,
            uss: num(7)?,
        });
    }
    if out.is_empty() {
        return Err(schema("table has no records".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub direction: &'static str,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub frames: usize,
    pub objects: Vec<u32>,
    pub metrics: BTreeMap<&'static str, MetricSummary>,
}

pub fn eval_summary(records: &[FrameMetrics]) -> AppResult<EvalSummary> {
    let mut metrics = BTreeMap::new();
    let mut frames = 0;
    for m in Metric::ALL {
        let series: Vec<f64> = per_frame_means(records, m)?.into_iter().map(|(_, v)| v).collect();
        frames = series.len();
        let s = SeriesSummary::of(&series)?;
        metrics.insert(
            m.name(),
            MetricSummary {
                direction: direction_name(m.direction()),
                mean: sig6(s.mean),
                std: sig6(s.std),
                median: sig6(s.median),
            },
        );
    }
    let mut objects: Vec<u32> = records.iter().map(|r| r.object_id).collect();
    objects.sort_unstable();
    objects.dedup();
    Ok(EvalSummary { frames, objects, metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianPair {
    pub baseline: f64,
    pub enhanced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonReport {
    #[serde(rename = "W")]
    pub w: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub direction: &'static str,
    pub baseline_mean: f64,
    pub enhanced_mean: f64,
    pub baseline_std: f64,
    pub enhanced_std: f64,
    pub delta: f64,
    /// `None` when the baseline mean is zero.
    pub pct_delta: Option<f64>,
    pub median: MedianPair,
    pub improved_pct: f64,
    pub wilcoxon: WilcoxonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub uss_scope: UssScope,
    pub frames: usize,
    pub metrics: BTreeMap<&'static str, MetricComparison>,
}

fn frame_series(records: &[FrameMetrics], m: Metric) -> AppResult<(Vec<usize>, Vec<f64>)> {
    Ok(per_frame_means(records, m)?.into_iter().unzip())
}

/// Paired comparison of two runs over identical frame sets.
pub fn compare(baseline: &[FrameMetrics], enhanced: &[FrameMetrics], scope: UssScope) -> AppResult<CompareReport> {
    let mut metrics = BTreeMap::new();
    let mut frames = 0;
    for m in Metric::ALL {
        let (fb, b) = frame_series(baseline, m)?;
        let (fe, e) = frame_series(enhanced, m)?;
        if fb != fe {
            return Err(AppError::Core(tpsmooth_core::Error::InvalidInput(format!(
                "runs cover different frames ({} vs {})",
                fb.len(),
                fe.len()
            ))));
        }
        frames = fb.len();
        let (sb, se) = (SeriesSummary::of(&b)?, SeriesSummary::of(&e)?);
        let delta = se.mean - sb.mean;
        let wilcoxon = match wilcoxon_signed_rank(&PairedSample::new(b.clone(), e.clone())?) {
            Ok(r) => WilcoxonReport {
                w: Some(sig6(r.statistic)),
                p: Some(sig6(r.p_value)),
                n: r.n_effective,
                method: match r.method {
                    PValueMethod::Exact => "exact",
                    PValueMethod::Normal => "normal",
                },
            },
            Err(tpsmooth_core::Error::UndefinedTest { .. }) => {
                WilcoxonReport { w: None, p: None, n: 0, method: "undefined" }
            }
            Err(e) => return Err(e.into()),
        };
        metrics.insert(
            m.name(),
            MetricComparison {
                direction: direction_name(m.direction()),
                baseline_mean: sig6(sb.mean),
                enhanced_mean: sig6(se.mean),
                baseline_std: sig6(sb.std),
                enhanced_std: sig6(se.std),
                delta: sig6(delta),
                pct_delta: (sb.mean != 0.0).then(|| sig6(100.0 * delta / sb.mean.abs())),
                median: MedianPair {
                    baseline: sig6(series_median(&b).expect("nonempty")),
                    enhanced: sig6(series_median(&e).expect("nonempty")),
                },
                improved_pct: sig6(improved_pct(&b, &e, m.direction())?),
                wilcoxon,
            },
        );
    }
    Ok(CompareReport { uss_scope: scope, frames, metrics })
}
