//! CSV, `key: value` report and SVG writers. All number formatting goes
//! through Rust's own formatter, so output never depends on the locale.

use std::fmt::{Display, Write as _};

use attractorlab::solver::Trajectory;

pub const CSV_HEADER: &str = "t, l2_sq, h1_sq, laplace_sq, ht_norm_sq, h1t_norm_sq, delay_sup_sq, a_of_lu, bound_R0_sq";

/// One CSV row per snapshot of `component`. `bound` holds `R₀²` per
/// snapshot; the column reads `nan` when it is absent.
pub fn trajectory_csv(traj: &Trajectory, component: usize, bound: Option<&[f64]>) -> String {
    let series = traj.window_series(component);
    let mut out = String::with_capacity(160 * (traj.snapshots() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..traj.snapshots() {
        let nb = traj.norms_at(component, i);
        let r0 = bound.and_then(|b| b.get(i)).copied().unwrap_or(f64::NAN);
        let a = traj.a_of_lu.get(i).copied().unwrap_or(f64::NAN);
        let cols = [
            traj.time(i),
            nb.l2_sq,
            nb.grad_sq,
            nb.laplace_sq,
            nb.ht_sq,
            nb.h1t_sq,
            series.ht(i),
            a,
            r0,
        ];
        for (j, v) in cols.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            write!(out, "{v:.15e}").expect("writing to a string");
        }
        out.push('\n');
    }
    out
}

/// Ordered `key: value` lines plus pass/fail verdicts.
#[derive(Clone, Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
    failed: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn list(&mut self, key: impl Into<String>, values: &[f64]) -> &mut Self {
        let joined = values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        self.value(key, format!("[{joined}]"))
    }

    pub fn verdict(&mut self, key: impl Into<String>, ok: bool) -> &mut Self {
        let key = key.into();
        if !ok {
            self.failed.push(key.clone());
        }
        self.value(key, if ok { "pass" } else { "fail" })
    }

    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn failures(&self) -> &[String] {
        &self.failed
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            writeln!(out, "{k}: {v}").expect("writing to a string");
        }
        out
    }
}

/// A named polyline.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Self-contained SVG line plot. With `log_y`, non-positive values are
/// dropped and the axis shows decades.
pub fn line_plot(title: &str, x_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h, left, right, top, bottom) = (800.0, 500.0, 80.0, 160.0, 40.0, 50.0);
    let map_y = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, map_y(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
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
        y1 = y0 + 1.0;
    }
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylabel = if log_y {
            format!("1e{yv:.1}")
        } else {
            format!("{yv:.3e}")
        };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
            sx(xv),
            top + ph + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ylabel}</text>"#,
            left - 6.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 10.0,
        escape(x_label)
    );
    for (i, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            w - right + 10.0,
            w - right + 30.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            w - right + 36.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Extracts columns of a CSV produced by [`trajectory_csv`] as series
/// against the first column.
pub fn csv_series(csv: &str, columns: &[&str]) -> Result<Vec<Series>, String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(", ").collect();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| format!("unknown column `{c}`"))
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(", ").map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    Ok(columns
        .iter()
        .zip(idx)
        .map(|(name, j)| Series {
            name: (*name).to_string(),
            points: rows.iter().map(|r| (r[0], r[j])).collect(),
        })
        .collect())
}
