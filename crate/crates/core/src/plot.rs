//! Static SVG line charts of Monte Carlo output.
//!
//! One polyline per series with a shaded ±2·mc_se band. Input is any CSV
//! with an x column, a series column, a y column and optionally a band
//! column; the defaults match the experiment output (`s`, `method`, `value`,
//! `mc_se`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: cannot parse `{value}` in column `{column}`")]
    Parse { line: usize, column: String, value: String },
    #[error("no data to plot")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub input: PathBuf,
    pub output: PathBuf,
    pub x_col: String,
    pub series_col: String,
    pub y_col: String,
    /// Half-width of the band is twice this column; no band when `None`.
    pub band_col: Option<String>,
    /// Keep only rows whose `metric` column equals this value.
    pub metric: Option<String>,
    pub title: String,
}

impl PlotSpec {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
            x_col: "s".into(),
            series_col: "method".into(),
            y_col: "value".into(),
            band_col: Some("mc_se".into()),
            metric: None,
            title: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(x, y, se)` sorted by x.
    pub points: Vec<(f64, f64, f64)>,
}

/// Groups CSV rows into series, in order of first appearance.
pub fn load_series(spec: &PlotSpec, text: &str) -> Result<Vec<Series>, PlotError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    };
    let xi = col(&spec.x_col)?;
    let si = col(&spec.series_col)?;
    let yi = col(&spec.y_col)?;
    let bi = spec.band_col.as_deref().map(col).transpose()?;
    let mi = spec.metric.as_ref().map(|_| col("metric")).transpose()?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if let (Some(mi), Some(want)) = (mi, &spec.metric) {
            if rec.get(mi) != Some(want.as_str()) {
                continue;
            }
        }
        let num = |i: usize, name: &str| {
            let raw = rec.get(i).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| PlotError::Parse {
                line: k + 2,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let x = num(xi, &spec.x_col)?;
        let y = num(yi, &spec.y_col)?;
        let se = match bi {
            Some(b) => num(b, spec.band_col.as_deref().unwrap_or_default())?,
            None => 0.0,
        };
        let name = rec.get(si).unwrap_or("").to_string();
        if !groups.contains_key(&name) {
            order.push(name.clone());
        }
        groups.entry(name).or_default().push((x, y, se));
    }
    if order.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let mut points = groups.remove(&name).unwrap_or_default();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name, points }
        })
        .collect())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 640.0;
const H: f64 = 400.0;
const ML: f64 = 70.0;
const MR: f64 = 130.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders series as a standalone SVG 1.1 document.
pub fn render_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> Result<String, PlotError> {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for &(x, y, se) in pts {
        any = true;
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y - 2.0 * se);
        y1 = y1.max(y + 2.0 * se);
    }
    if !any {
        return Err(PlotError::Empty);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
        y0 -= pad;
        y1 += pad;
    }
    let pad = (y1 - y0) * 0.05;
    y0 -= pad;
    y1 += pad;
    let (pw, ph) = (W - ML - MR, H - MT - MB);
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MT + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, ML + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<g stroke="black" fill="none"><rect x="{ML}" y="{MT}" width="{pw}" height="{ph}"/></g>"#);
    for t in nice_ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/>"##, MT, MT + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, MT + ph + 16.0, fmt_tick(t));
    }
    for t in nice_ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(s, r##"<line x1="{ML}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ccc"/>"##, ML + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ML - 6.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ML + pw / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        MT + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if ser.points.iter().any(|p| p.2 > 0.0) && ser.points.len() > 1 {
            let upper = ser.points.iter().map(|&(x, y, se)| format!("{:.2},{:.2}", px(x), py(y + 2.0 * se)));
            let lower = ser.points.iter().rev().map(|&(x, y, se)| format!("{:.2},{:.2}", px(x), py(y - 2.0 * se)));
            let poly: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, poly.join(" "));
        }
        if ser.points.len() == 1 {
            let (x, y, se) = ser.points[0];
            if se > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{color}"/>"#,
                    px(x),
                    py(y + 2.0 * se),
                    py(y - 2.0 * se)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(x), py(y));
        } else {
            let line: Vec<String> = ser.points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        }
        let ly = MT + 14.0 + 18.0 * k as f64;
        let lx = ML + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Reads `spec.input`, renders and writes `spec.output`. Nothing is written
/// on error.
pub fn render_plot(spec: &PlotSpec) -> Result<(), PlotError> {
    let text = fs::read_to_string(&spec.input)?;
    let series = load_series(spec, &text)?;
    let svg = render_svg(&series, &spec.title, &spec.x_col, &spec.y_col)?;
    fs::write(&spec.output, svg)?;
    Ok(())
}
