use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(&target, e));
    }
    Ok(target)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

pub fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Failure(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Failure(format!("csv: {e}")))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Bare-bones line chart: one polyline per series, axes with the data
/// ranges printed at the corners.
pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<(&'a str, Vec<(f64, f64)>)>,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

impl Chart<'_> {
    pub fn to_svg(&self) -> String {
        let (w, h, m) = (640.0, 400.0, 50.0);
        let pts = self
            .series
            .iter()
            .flat_map(|(_, s)| s.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            w / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            svg,
            r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
            h - m,
            w - m
        );
        let _ = writeln!(
            svg,
            r#"<text x="{m}" y="{}" text-anchor="middle">{x0:.4}</text>"#,
            h - m + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{x1:.4}</text>"#,
            w - m,
            h - m + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{y0:.4}</text>"#,
            m - 4.0,
            h - m
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{y1:.4}</text>"#,
            m - 4.0,
            m + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            w / 2.0,
            h - 12.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(self.y_label)
        );
        for (k, (name, data)) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut d = String::new();
            for &(x, y) in data.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = write!(d, "{}{:.2},{:.2}", if d.is_empty() { "M" } else { " L" }, sx(x), sy(y));
            }
            let _ = writeln!(
                svg,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
                w - m,
                m + 14.0 * k as f64,
                escape(name)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Keeps roughly `max` evenly spaced points so plots stay small.
pub fn thin<T: Copy>(data: &[T], max: usize) -> Vec<T> {
    if data.len() <= max || max < 2 {
        return data.to_vec();
    }
    let stride = data.len().div_ceil(max);
    let mut out: Vec<T> = data.iter().step_by(stride).copied().collect();
    if !(data.len() - 1).is_multiple_of(stride) {
        out.push(data[data.len() - 1]);
    }
    out
}
