//! Minimal static SVG rendering for curves, critical-difference diagrams and
//! simplex heatmaps.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Fixed colour; `None` takes the next palette entry.
    pub color: Option<&'static str>,
}

/// Line chart on `x ∈ [0, 1]`, `y ∈ [0, y_max]`.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (64.0, 170.0, 36.0, 52.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let y_max = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let sx = |x: f64| left + x * pw;
    let sy = |y: f64| top + ph - y / y_max * ph;

    let mut s = open(w, h);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        left + pw / 2.0,
        escape(title)
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#ddd\"/><text x=\"{x}\" y=\"{ty}\" text-anchor=\"middle\">{f:.1}</text>",
            x = sx(f),
            y0 = top,
            y1 = top + ph,
            ty = top + ph + 16.0
        );
        let v = f * y_max;
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#ddd\"/><text x=\"{tx}\" y=\"{ty}\" text-anchor=\"end\">{v:.3}</text>",
            y = sy(v),
            x1 = left + pw,
            tx = left - 6.0,
            ty = sy(v) + 4.0
        );
    }
    let _ =
        writeln!(s, "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        left + pw / 2.0,
        h - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        "<text transform=\"translate(16 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
        top + ph / 2.0,
        escape(y_label)
    );

    let mut next = 0;
    for (i, ser) in series.iter().enumerate() {
        let color = ser.color.unwrap_or_else(|| {
            next += 1;
            PALETTE[(next - 1) % PALETTE.len()]
        });
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash = if ser.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash} points=\"{}\"/>",
            pts.join(" ")
        );
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/><text x=\"{}\" y=\"{}\">{}</text>",
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Critical-difference style diagram: treatments on an average-rank axis
/// (rank 1 on the left), bars joining groups with no significant difference.
pub fn cd_diagram(title: &str, names: &[String], ranks: &[f64], groups: &[Vec<String>]) -> String {
    let t = names.len().max(2);
    let (w, left, right) = (640.0, 130.0, 130.0);
    let axis_y = 60.0;
    let half = names.len().div_ceil(2);
    let h = axis_y + 40.0 + 18.0 * (groups.len() + half) as f64 + 30.0;
    let pw = w - left - right;
    let sx = |r: f64| left + (r - 1.0) / (t - 1) as f64 * pw;

    let mut s = open(w, h);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"black\"/>",
        sx(1.0),
        sx(t as f64)
    );
    for r in 1..=t {
        let x = sx(r as f64);
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{axis_y}\" stroke=\"black\"/><text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{r}</text>",
            axis_y - 6.0,
            axis_y - 10.0
        );
    }

    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]));
    let label_top = axis_y + 30.0 + 18.0 * groups.len() as f64;
    for (pos, &i) in order.iter().enumerate() {
        let x = sx(ranks[i]);
        let (row, lx, anchor) =
            if pos < half { (pos, left - 10.0, "end") } else { (names.len() - 1 - pos, w - right + 10.0, "start") };
        let y = label_top + 18.0 * row as f64;
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"#444\" points=\"{x:.2},{axis_y} {x:.2},{y} {lx},{y}\"/><text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{} ({:.2})</text>",
            if anchor == "end" { lx - 4.0 } else { lx + 4.0 },
            y + 4.0,
            escape(&names[i]),
            ranks[i]
        );
    }
    for (g, members) in groups.iter().enumerate() {
        let rs: Vec<f64> = members.iter().filter_map(|m| names.iter().position(|n| n == m)).map(|i| ranks[i]).collect();
        let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = axis_y + 16.0 + 18.0 * g as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y}\" x2=\"{:.2}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"4\"/>",
            sx(lo) - 3.0,
            sx(hi) + 3.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Linear interpolation through a viridis-like ramp; `t` is clamped to [0, 1].
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Triangle heatmap over the 3-class simplex. `value(b, c)` is the cell value
/// at lattice counts `(n − b − c, b, c)`; each small triangle is coloured by
/// the mean of its corners.
pub fn simplex_heatmap(title: &str, n: usize, value: impl Fn(usize, usize) -> f64) -> String {
    let (w, h) = (560.0, 540.0);
    let side = 460.0;
    let (ox, oy) = (50.0, 60.0 + side * 3f64.sqrt() / 2.0);
    let pos = |b: usize, c: usize| {
        let (p2, p3) = (b as f64 / n as f64, c as f64 / n as f64);
        (ox + (0.5 * p2 + p3) * side, oy - p2 * 3f64.sqrt() / 2.0 * side)
    };
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for b in 0..=n {
        for c in 0..=n - b {
            let v = value(b, c);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };

    let mut s = open(w, h);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let mut tri = |corners: [(usize, usize); 3]| {
        let v = corners.iter().map(|&(b, c)| value(b, c)).sum::<f64>() / 3.0;
        let pts: Vec<String> = corners
            .iter()
            .map(|&(b, c)| {
                let (x, y) = pos(b, c);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let col = ramp((v - vmin) / span);
        let _ =
            writeln!(s, "<polygon points=\"{}\" fill=\"{col}\" stroke=\"{col}\" stroke-width=\"0.3\"/>", pts.join(" "));
    };
    for b in 0..n {
        for c in 0..n - b {
            tri([(b, c), (b + 1, c), (b, c + 1)]);
            if b + c + 2 <= n {
                tri([(b + 1, c), (b, c + 1), (b + 1, c + 1)]);
            }
        }
    }
    let (x1, y1) = pos(0, 0);
    let (x2, y2) = pos(n, 0);
    let (x3, y3) = pos(0, n);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">class 1</text>", x1 - 4.0, y1 + 16.0);
    let _ = writeln!(s, "<text x=\"{x2}\" y=\"{}\" text-anchor=\"middle\">class 2</text>", y2 - 8.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">class 3</text>", x3 + 4.0, y3 + 16.0);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">TU from {vmin:.3} (dark) to {vmax:.3} (light)</text>",
        w / 2.0,
        h - 10.0
    );
    s.push_str("</svg>\n");
    s
}
