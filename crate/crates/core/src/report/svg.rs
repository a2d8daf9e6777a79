//! Minimal standalone SVG plotting: lines with optional bands, scatter points,
//! grouped bars and reference lines on linear axes.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub enum Series {
    Line {
        name: String,
        points: Vec<(f64, f64)>,
        /// `(x, lo, hi)` shaded behind the line.
        band: Vec<(f64, f64, f64)>,
    },
    Scatter {
        name: String,
        points: Vec<(f64, f64)>,
    },
    /// One bar per category slot; `whiskers` are optional `(lo, hi)` per bar.
    Bars {
        name: String,
        values: Vec<Option<f64>>,
        whiskers: Vec<Option<(f64, f64)>>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Category names for bar charts; bars are grouped per slot.
    pub categories: Vec<String>,
    pub series: Vec<Series>,
    pub h_lines: Vec<f64>,
    pub v_lines: Vec<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

impl Plot {
    fn data_extent(&self) -> ((f64, f64), (f64, f64)) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        // a NaN x extends only the y range
        let mut see = |x: f64, y: f64| {
            if y.is_finite() {
                if x.is_finite() {
                    x0 = x0.min(x);
                    x1 = x1.max(x);
                }
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        };
        for s in &self.series {
            match s {
                Series::Line { points, band, .. } => {
                    points.iter().for_each(|&(x, y)| see(x, y));
                    band.iter().for_each(|&(x, lo, hi)| {
                        see(x, lo);
                        see(x, hi)
                    });
                }
                Series::Scatter { points, .. } => points.iter().for_each(|&(x, y)| see(x, y)),
                Series::Bars { values, whiskers, .. } => {
                    see(0.0, 0.0);
                    for (i, v) in values.iter().enumerate() {
                        if let Some(v) = v {
                            see(i as f64, *v);
                        }
                    }
                    for w in whiskers.iter().flatten() {
                        see(0.0, w.0);
                        see(0.0, w.1);
                    }
                }
            }
        }
        for &y in &self.h_lines {
            see(f64::NAN, y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |a: f64, b: f64| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        (pad(x0, x1), pad(y0, y1))
    }

    pub fn render(&self) -> String {
        let (dx, dy) = self.data_extent();
        let (x0, x1) = self.x_range.unwrap_or(dx);
        let (y0, y1) = self.y_range.unwrap_or(dy);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let bars = !self.categories.is_empty();
        let slots = self.categories.len().max(1) as f64;
        let sx = |x: f64| {
            if bars {
                LEFT + (x + 0.5) / slots * pw
            } else {
                LEFT + (x - x0) / (x1 - x0) * pw
            }
        };
        let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            esc(&self.title)
        );
        // axes and ticks
        let _ = writeln!(
            s,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );
        for t in nice_ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        if bars {
            for (i, c) in self.categories.iter().enumerate() {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    sx(i as f64),
                    TOP + ph + 18.0,
                    esc(c)
                );
            }
        } else {
            for t in nice_ticks(x0, x1) {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    sx(t),
                    TOP + ph + 18.0,
                    fmt_tick(t)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        for &y in &self.h_lines {
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#555" stroke-dasharray="4 3"/>"##,
                sy(y),
                LEFT + pw
            );
        }
        for &x in &self.v_lines {
            let _ = writeln!(
                s,
                r##"<line x1="{0:.1}" y1="{TOP}" x2="{0:.1}" y2="{1:.1}" stroke="#555" stroke-dasharray="4 3"/>"##,
                sx(x),
                TOP + ph
            );
        }

        let n_bars = self.series.iter().filter(|s| matches!(s, Series::Bars { .. })).count().max(1) as f64;
        let bar_w = pw / slots * 0.8 / n_bars;
        let mut bar_k = 0.0;
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let name = match series {
                Series::Line { name, points, band } => {
                    if !band.is_empty() {
                        let mut d = String::new();
                        for (i, (x, _, hi)) in band.iter().enumerate() {
                            let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, sx(*x), sy(*hi));
                        }
                        for (x, lo, _) in band.iter().rev() {
                            let _ = write!(d, "L{:.1},{:.1} ", sx(*x), sy(*lo));
                        }
                        let _ = writeln!(s, r#"<path d="{d}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#);
                    }
                    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                        pts.join(" ")
                    );
                    name
                }
                Series::Scatter { name, points } => {
                    for (x, y) in points {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}" fill-opacity="0.75"/>"#,
                            sx(*x),
                            sy(*y)
                        );
                    }
                    name
                }
                Series::Bars { name, values, whiskers } => {
                    for (i, v) in values.iter().enumerate() {
                        let Some(v) = v else { continue };
                        let cx = sx(i as f64) - pw / slots * 0.4 + bar_w * (bar_k + 0.5);
                        let (top, base) = (sy(v.max(0.0)), sy(v.min(0.0)));
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
                            cx - bar_w / 2.0,
                            bar_w * 0.95,
                            (base - top).max(0.5)
                        );
                        if let Some(Some((lo, hi))) = whiskers.get(i) {
                            let _ = writeln!(
                                s,
                                r##"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#222"/>"##,
                                sy(*lo),
                                sy(*hi)
                            );
                        }
                    }
                    bar_k += 1.0;
                    name
                }
            };
            let ly = TOP + 12.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                W - RIGHT + 14.0,
                ly - 10.0,
                W - RIGHT + 32.0,
                ly,
                esc(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 1.0);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&1.0));
        assert!(nice_ticks(-0.07, 0.31).len() >= 3);
    }

    #[test]
    fn renders_every_series_kind() {
        let p = Plot {
            title: "a < b".into(),
            series: vec![
                Series::Line {
                    name: "l".into(),
                    points: vec![(0.0, 1.0), (1.0, 2.0)],
                    band: vec![(0.0, 0.5, 1.5), (1.0, 1.5, 2.5)],
                },
                Series::Scatter {
                    name: "s".into(),
                    points: vec![(0.5, 0.5)],
                },
            ],
            h_lines: vec![0.0],
            ..Default::default()
        };
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("<polyline") && svg.contains("<circle") && svg.contains("<path"));
    }

    #[test]
    fn bars_render_without_nan() {
        let p = Plot {
            categories: vec!["x".into(), "y".into()],
            series: vec![Series::Bars {
                name: "b".into(),
                values: vec![Some(0.4), None],
                whiskers: vec![Some((0.3, 0.5)), None],
            }],
            ..Default::default()
        };
        let svg = p.render();
        assert!(!svg.contains("NaN"));
        assert_eq!(svg.matches("<rect").count(), 4);
    }
}
