//! Minimal fixed-layout SVG line charts.

use std::fmt::Write as _;

use crate::dynamics::Trajectory;
use crate::graph::Digraph;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 1500;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Dashed stroke, used to set one group of lines apart.
    pub dashed: bool,
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
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
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
        y0 -= pad;
        y1 += pad;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    for t in nice_ticks(x0, x1, 6) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#e5e5e5"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e5e5e5"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let stride = s.points.len().div_ceil(MAX_POINTS).max(1);
        let mut path = String::new();
        let n = s.points.len();
        for (k, &(x, y)) in s.points.iter().enumerate() {
            if (k % stride == 0 || k + 1 == n) && x.is_finite() && y.is_finite() {
                let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.3"{dash} points="{}"/>"#,
            path.trim_end()
        );
        // legend entries stop once the column is full
        let ly = TOP + 10.0 + 16.0 * idx as f64;
        if ly < TOP + ph {
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// `|e_i(t)|` for every recorded phase error.
pub fn errors_chart(traj: &Trajectory) -> String {
    let series: Vec<Series> = traj
        .error_nodes
        .iter()
        .enumerate()
        .map(|(q, node)| Series {
            label: format!("|e_{}|", node + 1),
            points: traj
                .times
                .iter()
                .zip(&traj.errors)
                .map(|(&t, e)| (t, e[q].abs()))
                .collect(),
            dashed: false,
        })
        .collect();
    line_chart("Phase errors", "t", "|e_i|", &series)
}

/// `k_ij(t)` for every edge; inter-cluster links are dashed.
pub fn couplings_chart(traj: &Trajectory, g: &Digraph, is_intra: impl Fn(usize) -> bool) -> String {
    let series: Vec<Series> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, (i, j))| Series {
            label: format!("k_{}_{}", i + 1, j + 1),
            points: traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| (t, s.k[e]))
                .collect(),
            dashed: !is_intra(e),
        })
        .collect();
    line_chart("Coupling strengths", "t", "k_ij", &series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 2000.0, 6);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&2000.0));
        assert!(nice_ticks(-0.013, 0.011, 6).contains(&0.0));
    }

    #[test]
    fn chart_is_well_formed() {
        let s = Series {
            label: "a<b".into(),
            points: (0..5000).map(|k| (k as f64, (k as f64).sin())).collect(),
            dashed: true,
        };
        let svg = line_chart("T", "t", "y", &[s]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(points.split(' ').count() <= MAX_POINTS + 1);
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let s = Series {
            label: "c".into(),
            points: vec![(0.0, 0.0)],
            dashed: false,
        };
        assert!(!line_chart("T", "t", "y", &[s]).contains("NaN"));
        assert!(!line_chart("T", "t", "y", &[]).contains("NaN"));
    }
}
