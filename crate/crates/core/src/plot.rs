//! Deterministic SVG rendering of sweep CSVs: one series per
//! (medium, orientation), stable element ordering, no timestamps.

use crate::sweep::{parse_csv, SweepError};
use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 24.0;
const MARGIN_B: f64 = 48.0;

const PALETTE: &[&str] = &[
    "#1b7837", "#762a83", "#e08214", "#2166ac", "#b2182b", "#4393c3", "#d6604d", "#5aae61",
];

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Render a sweep CSV to SVG. Rows with a non-numeric swept value or an
/// empty eta (failed points) are skipped; an empty data set yields axes
/// only, a single point a marker without a line.
pub fn render_svg(csv_text: &str, x_label: &str, y_label: &str) -> Result<String, SweepError> {
    let rows = parse_csv(csv_text)?;
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &rows {
        let x: f64 = match row.values.get("swept_value").and_then(|v| v.parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        let y: f64 = match row.values.get("eta").and_then(|v| v.parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        let key = format!(
            "{} {}",
            row.values.get("medium").cloned().unwrap_or_default(),
            row.values.get("orientation").cloned().unwrap_or_default()
        );
        series.entry(key).or_default().push((x, y));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for pts in series.values() {
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    y1 = (y1 * 1.15).max(0.1);
    let y0 = 0.0;

    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    )
    .unwrap();
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B),
        fmt(WIDTH - MARGIN_R),
        fmt(HEIGHT - MARGIN_B)
    )
    .unwrap();
    writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B)
    )
    .unwrap();

    // Ticks: five divisions per axis.
    for i in 0..=5 {
        let xv = x0 + (x1 - x0) * i as f64 / 5.0;
        let xp = px(xv);
        writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt(xp),
            fmt(HEIGHT - MARGIN_B),
            fmt(xp),
            fmt(HEIGHT - MARGIN_B + 5.0)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt(xp),
            fmt(HEIGHT - MARGIN_B + 18.0),
            fmt_tick(xv)
        )
        .unwrap();
        let yv = y0 + (y1 - y0) * i as f64 / 5.0;
        let yp = py(yv);
        writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt(MARGIN_L - 5.0),
            fmt(yp),
            fmt(MARGIN_L),
            fmt(yp)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            fmt(MARGIN_L - 8.0),
            fmt(yp + 4.0),
            fmt_tick(yv)
        )
        .unwrap();
    }
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        fmt(HEIGHT - 10.0),
        xml_escape(x_label)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        fmt((MARGIN_T + HEIGHT - MARGIN_B) / 2.0),
        fmt((MARGIN_T + HEIGHT - MARGIN_B) / 2.0),
        xml_escape(y_label)
    )
    .unwrap();

    // Series in sorted key order.
    for (si, (key, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if pts.len() > 1 {
            let path: Vec<String> =
                pts.iter().map(|&(x, y)| format!("{},{}", fmt(px(x)), fmt(py(y)))).collect();
            writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            )
            .unwrap();
        }
        for &(x, y) in pts {
            writeln!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                fmt(px(x)),
                fmt(py(y))
            )
            .unwrap();
        }
        let ly = MARGIN_T + 16.0 * si as f64 + 8.0;
        writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>",
            fmt(WIDTH - MARGIN_R + 14.0),
            fmt(ly - 4.0)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            fmt(WIDTH - MARGIN_R + 24.0),
            fmt(ly),
            xml_escape(key)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
