//! Trace CSV files and SVG convergence plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::IterationTrace;

pub const CSV_HEADER: [&str; 7] = ["run_id", "iter", "update_l2", "div_l2", "theta", "wall_ms", "status"];

/// One trace row. Intermediate rows carry status `running`; the last row of
/// a run carries its final status.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub run_id: String,
    pub iter: usize,
    pub update_l2: Option<f64>,
    pub div_l2: f64,
    pub theta: Option<f64>,
    pub wall_ms: f64,
    pub status: String,
}

impl CsvRecord {
    fn fields(&self) -> [String; 7] {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        [
            self.run_id.clone(),
            self.iter.to_string(),
            opt(self.update_l2),
            self.div_l2.to_string(),
            opt(self.theta),
            format!("{:.3}", self.wall_ms),
            self.status.clone(),
        ]
    }
}

pub fn trace_records(run_id: &str, trace: &IterationTrace) -> Vec<CsvRecord> {
    let last = trace.records.len().saturating_sub(1);
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| CsvRecord {
            run_id: run_id.to_string(),
            iter: r.iter,
            update_l2: r.update_l2,
            div_l2: r.div_l2,
            theta: r.theta,
            wall_ms: r.wall_ms,
            status: if i == last { trace.status.to_string() } else { "running".into() },
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Writes the traces one after another under a single header.
pub fn write_trace_csv(path: impl AsRef<Path>, runs: &[(&str, &IterationTrace)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for (id, trace) in runs {
        for rec in trace_records(id, trace) {
            w.write_record(rec.fields()).map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::config(format!("{}: unexpected CSV header", path.display())));
    }
    let bad = |row: usize| Error::config(format!("{}: malformed row {row}", path.display()));
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(i + 1));
        let opt = |k: usize| if rec[k].is_empty() { Ok(None) } else { num(k).map(Some) };
        out.push(CsvRecord {
            run_id: rec[0].to_string(),
            iter: rec[1].parse().map_err(|_| bad(i + 1))?,
            update_l2: opt(2)?,
            div_l2: num(3)?,
            theta: opt(4)?,
            wall_ms: num(5)?,
            status: rec[6].to_string(),
        });
    }
    Ok(out)
}

/// One polyline: values plotted against iterations 1, 2, ….
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub values: Vec<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Semilog-y plot of `‖u_k − u_{k−1}‖` against `k`, one polyline per series
/// with a legend. Non-positive values are left out.
pub fn export_svg_plot(series: &[PlotSeries], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(series)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub(crate) fn render_svg(series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::config("no traces to plot"));
    }
    let positive = |v: &f64| *v > 0.0 && v.is_finite();
    let logs: Vec<f64> = series.iter().flat_map(|s| s.values.iter().filter(|v| positive(v)).map(|v| v.log10())).collect();
    let (mut lo, mut hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if logs.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let n_max = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(2) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |k: f64| LEFT + (k - 1.0) / (n_max - 1.0) * plot_w;
    let y_of = |l: f64| TOP + (hi - l) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, LEFT + plot_w, TOP, TOP + plot_h);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for d in (lo as i64)..=(hi as i64) {
        let y = y_of(d as f64);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, x0 - 6.0, y + 4.0);
    }
    for i in 0..=4 {
        let k = 1.0 + (n_max - 1.0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x_of(k), y1 + 18.0, k.round());
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">iteration</text>"#, LEFT + plot_w / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">update norm</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| positive(v))
            .map(|(k, v)| format!("{:.2},{:.2}", x_of(k as f64 + 1.0), y_of(v.log10())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = x1 + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
