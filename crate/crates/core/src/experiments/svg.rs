//! Static line plots from wide CSV tables: the first column is the x axis,
//! every further column becomes one polyline labelled by its header.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgStyle {
    pub width: u32,
    pub height: u32,
    pub title: String,
    /// Defaults to the first header when empty.
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 720, height: 440, title: String::new(), x_label: String::new(), y_label: String::new(), log_x: false }
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse(csv_text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(e) => return Err(parse_error(&e)),
    };
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Parse { line: 1, message: "missing header row".into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line, message: format!("not a number: {field:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

fn parse_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse { line, message: e.to_string() }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, include_zero: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if include_zero && !log {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`, or `None` for values the axis cannot show.
    fn frac(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn tick_value(&self, f: f64) -> f64 {
        let v = self.lo + f * (self.hi - self.lo);
        if self.log {
            10f64.powf(v)
        } else {
            v
        }
    }
}

/// Renders a wide CSV table as an SVG line plot.
///
/// Output depends only on the input text and style. A table with a header
/// but no data rows yields axes and legend only.
pub fn render_svg(csv_text: &str, style: &SvgStyle) -> Result<String> {
    let table = parse(csv_text)?;
    let (w, h) = (style.width as f64, style.height as f64);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let x_axis = Axis::fit(table.rows.iter().map(|r| r[0]), style.log_x, false);
    let y_axis = Axis::fit(table.rows.iter().flat_map(|r| r[1..].iter().copied()), false, true);
    let px = |v: f64| x_axis.frac(v).map(|f| left + f * pw);
    let py = |v: f64| y_axis.frac(v).map(|f| top + (1.0 - f) * ph);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            left + pw / 2.0,
            escape(&style.title)
        );
    }
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{left:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{left:.2}" y1="{top:.2}" x2="{left:.2}" y2="{:.2}"/></g>"#,
        top + ph,
        left + pw,
        top + ph,
        top + ph
    );
    let _ = writeln!(s, r#"<g class="ticks">"#);
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x = left + f * pw;
        let y = top + (1.0 - f) * ph;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            tick_label(x_axis.tick_value(f))
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(y_axis.tick_value(f))
        );
    }
    let _ = writeln!(s, "</g>");
    let x_label = if style.x_label.is_empty() { &table.headers[0] } else { &style.x_label };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(x_label)
    );
    if !style.y_label.is_empty() {
        let _ = writeln!(
            s,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            top + ph / 2.0,
            escape(&style.y_label)
        );
    }

    for (k, label) in table.headers.iter().enumerate().skip(1) {
        let colour = PALETTE[(k - 1) % PALETTE.len()];
        let points: Vec<String> = table
            .rows
            .iter()
            .filter_map(|r| Some(format!("{:.2},{:.2}", px(r[0])?, py(r[k])?)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            escape(label),
            points.join(" ")
        );
        let ly = top + 10.0 + 18.0 * (k - 1) as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
