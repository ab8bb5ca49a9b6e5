//! Minimal line-plot SVG writer for the experiment figures.

use std::fmt::Write;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 44.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub(crate) struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub(crate) struct Panel {
    pub title: String,
    pub x_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Dashed horizontal line, e.g. a true parameter value.
    pub reference: Option<f64>,
}

fn tr(v: f64, log: bool) -> f64 {
    if log {
        v.log10()
    } else {
        v
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1e-3 + 0.05 * lo.abs());
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
        if b >= a {
            return (a..=b).map(|e| e as f64).collect();
        }
    }
    (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

fn draw_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let keep = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let pts = || {
        p.series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| keep(*x, p.log_x) && keep(*y, p.log_y))
    };
    let (x0, x1) = range(pts().map(|(x, _)| tr(*x, p.log_x)));
    let ys = pts().map(|(_, y)| tr(*y, p.log_y)).chain(p.reference.filter(|r| keep(*r, p.log_y)).map(|r| tr(r, p.log_y)));
    let (y0, y1) = range(ys);
    let w = PANEL_W - MARGIN_L - MARGIN_R;
    let h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| oy + MARGIN_T + h - (y - y0) / (y1 - y0) * h;

    let _ = writeln!(
        out,
        r##"<g class="panel"><rect x="{:.1}" y="{:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#333"/>"##,
        ox + MARGIN_L,
        oy + MARGIN_T
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        ox + MARGIN_L + w / 2.0,
        oy + 18.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
        ox + MARGIN_L + w / 2.0,
        oy + PANEL_H - 8.0,
        escape(&p.x_label)
    );
    for t in ticks(x0, x1, p.log_x) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            px(t),
            oy + MARGIN_T + h + 14.0,
            fmt_tick(t, p.log_x)
        );
    }
    for t in ticks(y0, y1, p.log_y) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            ox + MARGIN_L - 4.0,
            py(t) + 3.0,
            fmt_tick(t, p.log_y)
        );
    }
    if let Some(r) = p.reference.filter(|r| keep(*r, p.log_y)) {
        let y = py(tr(r, p.log_y));
        let _ = writeln!(
            out,
            r##"<line class="reference" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#000" stroke-dasharray="5,4"/>"##,
            ox + MARGIN_L,
            ox + MARGIN_L + w
        );
    }
    for (i, s) in p.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| keep(*x, p.log_x) && keep(*y, p.log_y))
            .map(|(x, y)| format!("{:.2},{:.2}", px(tr(*x, p.log_x)), py(tr(*y, p.log_y))))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = oy + MARGIN_T + 14.0 + 13.0 * i as f64;
        let lx = ox + PANEL_W - MARGIN_R - 90.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}" font-size="10">{}</text>"#,
            ly - 3.0,
            lx + 14.0,
            ly - 3.0,
            lx + 18.0,
            escape(&s.name)
        );
    }
    out.push_str("</g>\n");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Lays the panels out on a grid with `cols` columns.
pub(crate) fn render(panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let width = PANEL_W * cols.min(panels.len().max(1)) as f64;
    let height = PANEL_H * rows as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, PANEL_W * (i % cols) as f64, PANEL_H * (i / cols) as f64);
    }
    out.push_str("</svg>\n");
    out
}
