//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

/// Renders the series as polylines. Points that cannot be shown on a log
/// axis are dropped.
pub fn line_chart(axes: Axes<'_>, series: &[Series<'_>]) -> String {
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| Some((transform(x, axes.log_x)?, transform(y, axes.log_y)?)))
                .collect()
        })
        .collect();
    let all = mapped.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let tick = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, axes.title);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {m} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, axes.x_label);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        axes.y_label
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, HEIGHT - MARGIN + 16.0),
        (x1, "end", WIDTH - MARGIN, HEIGHT - MARGIN + 16.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#, tick(v, axes.log_x));
    }
    for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, MARGIN - 4.0, tick(v, axes.log_y));
    }
    for (i, (pts, s)) in mapped.iter().zip(series).enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{colour}" fill="none" stroke-width="1.5"/>"#, path.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            MARGIN + 16.0 * i as f64,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Keeps at most `max` evenly spaced points.
pub fn thin(points: Vec<(f64, f64)>, max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max {
        return points;
    }
    let step = points.len().div_ceil(max);
    points.into_iter().step_by(step).collect()
}
