//! Static SVG plots drawn from the CSV tables.

use std::fmt::Write as _;

const W: f64 = 560.0;
const H: f64 = 380.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 120.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#d95f02", "#1b9e77", "#7570b3", "#444444", "#e7298a", "#66a61e"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw as a step function (empirical CDF).
    pub steps: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>
"#,
        W / 2.0,
        esc(title),
        PAD_L + (W - PAD_L - PAD_R) / 2.0,
        H - 10.0,
        esc(x_label),
        PAD_T + (H - PAD_T - PAD_B) / 2.0,
        PAD_T + (H - PAD_T - PAD_B) / 2.0,
        esc(y_label),
    );
    s
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line chart; with `log_y` the y values are plotted as `log10` and
/// non-positive values are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let visible: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, tf(y)))
                .collect()
        })
        .collect();
    let (x0, x1) = range(visible.iter().flatten().map(|p| p.0));
    let (y0, y1) = range(visible.iter().flatten().map(|p| p.1));
    let px = |x: f64| PAD_L + (x - x0) / (x1 - x0) * (W - PAD_L - PAD_R);
    let py = |y: f64| H - PAD_B - (y - y0) / (y1 - y0) * (H - PAD_T - PAD_B);
    let y_axis = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    let mut s = header(title, x_label, &y_axis);
    let _ = writeln!(
        s,
        r##"<rect x="{PAD_L}" y="{PAD_T}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        W - PAD_L - PAD_R,
        H - PAD_T - PAD_B
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.3}</text>"#, px(fx), H - PAD_B + 16.0, fx);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#, PAD_L - 6.0, py(fy) + 4.0, fy);
    }
    for (k, (ser, pts)) in series.iter().zip(&visible).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut path = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            if i == 0 {
                let _ = write!(path, "M{:.2},{:.2}", px(x), py(y));
            } else {
                if ser.steps {
                    let _ = write!(path, " H{:.2}", px(x));
                }
                let _ = write!(path, " L{:.2},{:.2}", px(x), py(y));
            }
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="2"/>"#);
        if !ser.steps {
            for &(x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
            }
        }
        let ly = PAD_T + 14.0 + 18.0 * k as f64;
        let lx = W - PAD_R + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            esc(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of `values[row][col]` with a linear grey-to-orange scale.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> String {
    let (v0, v1) = range(values.iter().flatten().copied().filter(|v| v.is_finite()));
    let cw = (W - PAD_L - PAD_R) / xs.len().max(1) as f64;
    let ch = (H - PAD_T - PAD_B) / ys.len().max(1) as f64;
    let mut s = header(title, x_label, y_label);
    for (r, row) in values.iter().enumerate() {
        for (col, &v) in row.iter().enumerate() {
            let t = if v.is_finite() { (v - v0) / (v1 - v0) } else { 0.0 };
            let (red, green, blue) = (
                (240.0 - 23.0 * t) as u8,
                (240.0 - 145.0 * t) as u8,
                (240.0 - 238.0 * t) as u8,
            );
            let x = PAD_L + col as f64 * cw;
            // first row at the bottom
            let y = H - PAD_B - (r + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({red},{green},{blue})"/><text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v:.2e}</text>"#,
                x + cw / 2.0,
                y + ch / 2.0 + 4.0
            );
        }
    }
    for (col, x) in xs.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#, PAD_L + (col as f64 + 0.5) * cw, H - PAD_B + 16.0);
    }
    for (r, y) in ys.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{y}</text>"#, PAD_L - 6.0, H - PAD_B - (r as f64 + 0.5) * ch + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Empirical CDF points `(x, k/n)` of `samples`, starting at `(min, 0)`.
pub fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out = Vec::with_capacity(v.len() + 1);
    if let Some(&first) = v.first() {
        out.push((first, 0.0));
    }
    for (k, x) in v.into_iter().enumerate() {
        out.push((x, (k + 1) as f64 / n));
    }
    out
}
