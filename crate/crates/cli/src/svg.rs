//! Minimal static SVG line charts with a one-standard-deviation band.

use std::fmt::Write as _;

use crate::output::SummaryRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e6) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// One line per algorithm through the finite means, with a shaded
/// `mean +- std` band. Rows must share a metric.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, rows: &[&SummaryRow]) -> String {
    let mut algorithms: Vec<&str> = Vec::new();
    for r in rows {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
    }
    let finite: Vec<&&SummaryRow> = rows.iter().filter(|r| r.mean.is_finite()).collect();
    let (x0, x1) = extent(finite.iter().map(|r| r.n as f64));
    let band = |r: &SummaryRow| if r.std.is_finite() { r.std } else { 0.0 };
    let (y0, y1) = extent(
        finite
            .iter()
            .flat_map(|r| [r.mean - band(r), r.mean + band(r)]),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="800" height="600" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (x, y) = (px(xv), py(yv));
        writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##,
            TOP,
            TOP + plot_h
        )
        .unwrap();
        writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + plot_w
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(xv)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(yv)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (i, alg) in algorithms.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts: Vec<&SummaryRow> = finite
            .iter()
            .filter(|r| r.algorithm == *alg)
            .map(|r| **r)
            .collect();
        pts.sort_by_key(|r| r.n);
        if !pts.is_empty() {
            let upper = pts
                .iter()
                .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.mean + band(r))));
            let lower = pts
                .iter()
                .rev()
                .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.mean - band(r))));
            let poly: Vec<String> = upper.chain(lower).collect();
            writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                poly.join(" ")
            )
            .unwrap();
            let line: Vec<String> = pts
                .iter()
                .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.mean)))
                .collect();
            writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            )
            .unwrap();
            for r in &pts {
                writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(r.n as f64),
                    py(r.mean)
                )
                .unwrap();
            }
        }
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            lx + 24.0
        )
        .unwrap();
        let label = if pts.is_empty() {
            format!("{alg} (no data)")
        } else {
            alg.to_string()
        };
        writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
