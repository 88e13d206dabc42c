//! Static SVG line charts, one metric per file, baseline and enhanced
//! overlaid.

use std::fmt::Write as _;

use tpsmooth_core::metrics::{per_frame_means, FrameMetrics, Metric};

use crate::error::AppResult;

/// Metrics drawn by [`render_all`].
pub const PLOTTED: [Metric; 4] = [Metric::TemporalIou, Metric::WarpedIou, Metric::BoundaryF, Metric::Uss];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn title(m: Metric) -> &'static str {
    match m {
        Metric::TemporalIou => "Temporal IoU",
        Metric::WarpedIou => "Warped IoU",
        Metric::BoundaryF => "Boundary F",
        Metric::Dropout => "Dropout",
        Metric::FlowMagnitude => "Flow magnitude (px)",
        Metric::Uss => "Unified Stability Score",
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], x: &dyn Fn(f64) -> f64, y: &dyn Fn(f64) -> f64, color: &str) {
    let coords: Vec<String> = pts.iter().map(|&(f, v)| format!("{:.2},{:.2}", x(f), y(v))).collect();
    let _ =
        writeln!(out, r#"  <polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
}

/// One chart as an SVG document.
pub fn render(metric: Metric, baseline: &[FrameMetrics], enhanced: &[FrameMetrics]) -> AppResult<String> {
    let to_f = |s: Vec<(usize, f64)>| s.into_iter().map(|(f, v)| (f as f64, v)).collect::<Vec<_>>();
    let b = to_f(per_frame_means(baseline, metric)?);
    let e = to_f(per_frame_means(enhanced, metric)?);
    let all = b.iter().chain(&e);
    let (fmin, fmax) = all.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (mut vmin, mut vmax) = (0.0f64, 1.0f64);
    if metric == Metric::FlowMagnitude {
        vmax = all.fold(0.0f64, |hi, p| hi.max(p.1)).max(1e-9) * 1.05;
    } else {
        vmin = vmin.min(e.iter().chain(&b).fold(0.0f64, |lo, p| lo.min(p.1)));
        vmax = vmax.max(e.iter().chain(&b).fold(1.0f64, |hi, p| hi.max(p.1)));
    }
    let span_f = if fmax > fmin { fmax - fmin } else { 1.0 };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let x = move |f: f64| LEFT + (f - fmin) / span_f * pw;
    let y = move |v: f64| TOP + (1.0 - (v - vmin) / (vmax - vmin)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        title(metric)
    );
    for i in 0..=4 {
        let v = vmin + (vmax - vmin) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"  <line x1="{LEFT}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            WIDTH - RIGHT,
            y(v),
            y(v)
        );
        let _ = writeln!(out, r#"  <text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, LEFT - 6.0, y(v) + 4.0);
    }
    for i in 0..=5 {
        let f = fmin + span_f * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle">{f:.0}</text>"#,
            x(f),
            HEIGHT - BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle">frame</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ =
        writeln!(out, r##"  <rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##);
    polyline(&mut out, &b, &x, &y, "#888888");
    polyline(&mut out, &e, &x, &y, "#1f77b4");
    for (i, (label, color)) in [("baseline", "#888888"), ("enhanced", "#1f77b4")].into_iter().enumerate() {
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT - 110.0;
        let _ = writeln!(
            out,
            r#"  <line x1="{lx:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0,
            ly - 4.0,
            ly - 4.0
        );
        let _ = writeln!(out, r#"  <text x="{:.2}" y="{ly:.2}">{label}</text>"#, lx + 26.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// `(file name, document)` for every plotted metric.
pub fn render_all(baseline: &[FrameMetrics], enhanced: &[FrameMetrics]) -> AppResult<Vec<(String, String)>> {
    PLOTTED.iter().map(|&m| Ok((format!("{}.svg", m.name()), render(m, baseline, enhanced)?))).collect()
}
