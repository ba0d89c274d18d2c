//! Self-contained SVG line and bar charts.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 360.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Grouped bars: one group per category, one bar per metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub categories: Vec<String>,
    pub metrics: Vec<String>,
    /// `values[category][metric]`; `None` draws no bar.
    pub values: Vec<Vec<Option<f64>>>,
    pub log_scale: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !span.is_finite() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (MARGIN_L, HEIGHT - MARGIN_B, WIDTH - MARGIN_R, MARGIN_T);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &self.x_label, &self.y_label);
        let finite = |v: &&f64| v.is_finite();
        let xs = self.series.iter().flat_map(|s| s.xs.iter()).filter(finite);
        let ys = self.series.iter().flat_map(|s| s.ys.iter()).filter(finite);
        let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (mut ymin, mut ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !xmin.is_finite() {
            out.push_str("</svg>\n");
            return out;
        }
        if ymax - ymin < 1e-12 {
            ymin -= 0.5;
            ymax += 0.5;
        } else {
            let pad = 0.05 * (ymax - ymin);
            ymin -= pad;
            ymax += pad;
        }
        let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
        let px = |x: f64| MARGIN_L + (x - xmin) / xspan * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

        for t in nice_ticks(xmin, xmax, 8) {
            let _ = writeln!(
                out,
                r#"<line x1="{0:.1}" y1="{1}" x2="{0:.1}" y2="{2}" stroke="black"/><text x="{0:.1}" y="{3}" text-anchor="middle">{4}</text>"#,
                px(t),
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0,
                HEIGHT - MARGIN_B + 18.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(ymin, ymax, 6) {
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1:.1}" x2="{2}" y2="{1:.1}" stroke="#ddd"/><text x="{3}" y="{4:.1}" text-anchor="end">{5}</text>"##,
                MARGIN_L,
                py(t),
                WIDTH - MARGIN_R,
                MARGIN_L - 6.0,
                py(t) + 4.0,
                fmt_tick(t)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for (&x, &y) in s.xs.iter().zip(&s.ys) {
                if !(x.is_finite() && y.is_finite()) {
                    pen_down = false;
                    continue;
                }
                let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
                pen_down = true;
            }
            let dash = if i == 1 && self.series.len() == 2 { r#" stroke-dasharray="5 3""# } else { "" };
            let _ =
                writeln!(out, r#"<path d="{}" stroke="{color}" fill="none" stroke-width="1.2"{dash}/>"#, d.trim_end());
            let ly = MARGIN_T + 10.0 + 18.0 * i as f64;
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

impl BarChart {
    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, "", &self.y_label);
        let vals: Vec<f64> = self
            .values
            .iter()
            .flatten()
            .filter_map(|v| *v)
            .filter(|v| v.is_finite() && (!self.log_scale || *v > 0.0))
            .collect();
        if vals.is_empty() || self.categories.is_empty() {
            out.push_str("</svg>\n");
            return out;
        }
        let tf = |v: f64| if self.log_scale { v.log10() } else { v };
        let vmax = vals.iter().copied().map(tf).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if self.log_scale {
            let vmin = vals.iter().copied().map(tf).fold(f64::INFINITY, f64::min);
            (vmin.floor(), vmax.ceil().max(vmin.floor() + 1.0))
        } else {
            (0.0, if vmax > 0.0 { vmax * 1.1 } else { 1.0 })
        };
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let py = |t: f64| HEIGHT - MARGIN_B - (t - lo) / (hi - lo) * plot_h;
        let ticks: Vec<f64> =
            if self.log_scale { (lo as i32..=hi as i32).map(f64::from).collect() } else { nice_ticks(lo, hi, 6) };
        for t in ticks {
            let label = if self.log_scale { format!("1e{}", t as i32) } else { fmt_tick(t) };
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1:.1}" x2="{2}" y2="{1:.1}" stroke="#ddd"/><text x="{3}" y="{4:.1}" text-anchor="end">{5}</text>"##,
                MARGIN_L,
                py(t),
                WIDTH - MARGIN_R,
                MARGIN_L - 6.0,
                py(t) + 4.0,
                label
            );
        }
        let group_w = (WIDTH - MARGIN_L - MARGIN_R) / self.categories.len() as f64;
        let bar_w = group_w * 0.7 / self.metrics.len().max(1) as f64;
        for (ci, cat) in self.categories.iter().enumerate() {
            let gx = MARGIN_L + group_w * ci as f64 + group_w * 0.15;
            for (mi, v) in self.values.get(ci).into_iter().flatten().enumerate() {
                let Some(v) = v.filter(|v| v.is_finite() && (!self.log_scale || *v > 0.0)) else { continue };
                let top = py(tf(v).min(hi));
                let x = gx + bar_w * mi as f64;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {}: {v}</title></rect>"#,
                    bar_w * 0.95,
                    (HEIGHT - MARGIN_B - top).max(0.0),
                    PALETTE[mi % PALETTE.len()],
                    escape(cat),
                    escape(&self.metrics[mi])
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
                gx + group_w * 0.35,
                HEIGHT - MARGIN_B + 18.0,
                escape(cat)
            );
        }
        for (mi, m) in self.metrics.iter().enumerate() {
            let ly = MARGIN_T + 10.0 + 18.0 * mi as f64;
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx}" y="{}" width="14" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                ly - 5.0,
                PALETTE[mi % PALETTE.len()],
                lx + 20.0,
                ly + 4.0,
                escape(m)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_has_one_path_per_series() {
        let chart = LineChart {
            title: "t".into(),
            x_label: "step".into(),
            y_label: "value".into(),
            series: vec![
                Series { name: "a".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![0.0, 1.0, 0.5] },
                Series { name: "b".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, 1.0, 1.0] },
            ],
        };
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path d=\"M").count(), 3); // axes + two series
    }

    #[test]
    fn bar_chart_skips_missing_values() {
        let chart = BarChart {
            title: "mse".into(),
            y_label: "MSE".into(),
            categories: vec!["x".into(), "y".into()],
            metrics: vec!["train".into(), "predict".into()],
            values: vec![vec![Some(0.01), Some(0.001)], vec![Some(0.1), None]],
            log_scale: true,
        };
        let svg = chart.to_svg();
        assert_eq!(svg.matches("<title>").count(), 3);
    }

    #[test]
    fn ticks_are_round() {
        let t = nice_ticks(0.0, 1.0, 5);
        assert_eq!(t.len(), 6);
        assert_eq!((t[0], t[5]), (0.0, 1.0));
        assert_eq!(fmt_tick(t[3]), "0.6");
    }
}
