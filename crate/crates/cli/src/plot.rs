//! Minimal SVG line plots. Output depends only on the data, so reruns are
//! byte-identical.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            dashed: false,
            markers: true,
        }
    }

    pub fn reference(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            dashed: true,
            markers: false,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
pub enum Scale {
    Linear,
    Log,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_scale: Scale,
    pub y_scale: Scale,
}

/// Line through `anchor` with the given log-log `slope`, spanning `xs`.
pub fn slope_guide(label: &str, anchor: (f64, f64), slope: f64, xs: (f64, f64)) -> Series {
    let at = |x: f64| anchor.1 * (x / anchor.0).powf(slope);
    Series::reference(label, vec![(xs.0, at(xs.0)), (xs.1, at(xs.1))])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn transform(v: f64, scale: Scale) -> Option<f64> {
    match scale {
        Scale::Linear => v.is_finite().then_some(v),
        Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn range(vals: impl Iterator<Item = f64>, scale: Scale) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if scale == Scale::Log {
        return (
            lo.floor(),
            if hi.ceil() > lo.floor() {
                hi.ceil()
            } else {
                lo.floor() + 1.0
            },
        );
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<(f64, String)> {
    match scale {
        Scale::Log => {
            let step = ((hi - lo) / 8.0).ceil().max(1.0);
            let mut out = Vec::new();
            let mut e = lo;
            while e <= hi + 1e-9 {
                out.push((e, format!("1e{}", e as i64)));
                e += step;
            }
            out
        }
        Scale::Linear => (0..=4)
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / 4.0;
                (v, format!("{v:.3}"))
            })
            .collect(),
    }
}

pub fn render(plot: &Plot, series: &[Series]) -> String {
    let tx: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| {
                    Some((transform(x, plot.x_scale)?, transform(y, plot.y_scale)?))
                })
                .collect()
        })
        .collect();
    let (x0, x1) = range(tx.iter().flatten().map(|p| p.0), plot.x_scale);
    let (y0, y1) = range(tx.iter().flatten().map(|p| p.1), plot.y_scale);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(plot.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for (v, label) in ticks(x0, x1, plot.x_scale) {
        let x = px(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    for (v, label) in ticks(y0, y1, plot.y_scale) {
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 14.0,
        escape(plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(plot.y_label)
    );
    for (i, (ser, pts)) in series.iter().zip(&tx).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = if ser.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        if pts.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            );
        }
        if ser.markers || pts.len() == 1 {
            for &(x, y) in pts {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(x),
                    py(y)
                );
            }
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic_and_skips_nonpositive_log_points() {
        let plot = Plot {
            title: "gap <vs> rho",
            x_label: "rho",
            y_label: "gap",
            x_scale: Scale::Log,
            y_scale: Scale::Log,
        };
        let data = vec![Series::line(
            "gap",
            vec![(0.1, 1e-2), (0.01, 1e-3), (0.001, 0.0)],
        )];
        let a = render(&plot, &data);
        assert_eq!(a, render(&plot, &data));
        assert!(a.starts_with("<svg"));
        assert!(a.contains("gap &lt;vs&gt; rho"));
        assert_eq!(a.matches("<circle").count(), 2);
    }

    #[test]
    fn guide_has_requested_slope() {
        let g = slope_guide("slope 2", (0.1, 1e-3), 2.0, (0.01, 0.1));
        let (a, b) = (g.points[0], g.points[1]);
        assert!(((b.1 / a.1).log10() / (b.0 / a.0).log10() - 2.0).abs() < 1e-12);
    }
}
