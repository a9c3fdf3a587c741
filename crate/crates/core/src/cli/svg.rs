use std::fmt::Write as _;

use crate::numfmt::sig9;
use crate::sim::RoundLog;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN: f64 = 48.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

fn polyline(out: &mut String, values: &[f64], y_max: f64, top: f64, color: &str) {
    let n = values.len().max(2) - 1;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = PANEL_HEIGHT - 2.0 * MARGIN;
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = MARGIN + plot_w * i as f64 / n as f64;
            let y = top + MARGIN + plot_h * (1.0 - v / y_max);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        pts.join(" ")
    );
}

fn panel(out: &mut String, title: &str, series: &[Series], top: f64) {
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{}" width="{}" height="{}" fill="none" stroke="grey"/>"#,
        top + MARGIN,
        WIDTH - 2.0 * MARGIN,
        PANEL_HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" font-size="13">{title}</text>"#, top + MARGIN - 8.0);
    let _ = writeln!(
        out,
        r#"<text x="4" y="{}" font-size="10">{}</text>"#,
        top + MARGIN + 4.0,
        sig9(y_max)
    );
    for (i, s) in series.iter().enumerate() {
        polyline(out, &s.values, y_max, top, s.color);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" fill="{}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            top + MARGIN + 14.0 + 14.0 * i as f64,
            s.color,
            s.label
        );
    }
}

/// Two stacked panels: cumulative regret, and `Σ‖x‖²` against `2 Δ log det`.
pub fn render_simulation_svg(logs: &[RoundLog]) -> String {
    let mut out = String::new();
    let height = 2.0 * PANEL_HEIGHT;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    panel(
        &mut out,
        "cumulative regret",
        &[Series {
            label: "regret",
            color: "#1f77b4",
            values: logs.iter().map(|l| l.cumulative_regret).collect(),
        }],
        0.0,
    );
    panel(
        &mut out,
        "elliptical potential",
        &[
            Series {
                label: "sum of norms",
                color: "#d62728",
                values: logs.iter().map(|l| l.audit.sum_norms).collect(),
            },
            Series {
                label: "2 delta logdet",
                color: "#2ca02c",
                values: logs.iter().map(|l| l.audit.two_delta_logdet).collect(),
            },
        ],
        PANEL_HEIGHT,
    );
    out.push_str("</svg>\n");
    out
}
