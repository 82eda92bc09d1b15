//! Minimal line charts with dashed change-point markers.
//!
//! Output is plain SVG 1.1 text built with fixed-precision coordinates, so the
//! same input always yields the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::{CategoryMatrix, YearMonth};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;
const Y_TICKS: usize = 5;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Lowercase ASCII alphanumerics separated by single hyphens.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("series");
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// One chart: the series as a polyline, a dashed vertical line between
/// months `d - 1` and `d` for each interior divider `d`, and a tick under
/// every January.
pub fn svg_chart(title: &str, start: YearMonth, series: &[f64], dividers: &[usize]) -> Result<String> {
    let n = series.len();
    if n == 0 {
        return Err(Error::invalid("cannot chart an empty series"));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("series {title:?} contains non-finite values")));
    }
    if let Some(d) = dividers.iter().find(|&&d| d == 0 || d >= n) {
        return Err(Error::invalid(format!(
            "divider {d} is not interior to a series of length {n}"
        )));
    }

    let (mut lo, mut hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let step = plot_w / n as f64;
    let x_at = |t: f64| LEFT + (t + 0.5) * step;
    let y_at = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    let w = &mut s;
    // writing to a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(w, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        w,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{LEFT}" y="20" font-family="sans-serif" font-size="13">{}</text>"#,
        escape(title)
    );

    let _ = writeln!(
        w,
        r##"<g stroke="#cccccc" stroke-width="1" font-family="sans-serif" font-size="10">"##
    );
    for i in 0..=Y_TICKS {
        let v = lo + (hi - lo) * i as f64 / Y_TICKS as f64;
        let y = y_at(v);
        let _ = writeln!(
            w,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            w,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none" fill="#333333">{}</text>"##,
            LEFT - 4.0,
            y + 3.0,
            tick_label(v)
        );
    }
    let axis_y = TOP + plot_h;
    for t in 0..n {
        let m = start.add_months(t as i64);
        if m.month() != 1 {
            continue;
        }
        let x = x_at(t as f64);
        let _ = writeln!(
            w,
            r#"<line x1="{x:.2}" y1="{axis_y:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            axis_y + 4.0
        );
        let _ = writeln!(
            w,
            r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle" stroke="none" fill="#333333">{}</text>"##,
            axis_y + 16.0,
            m.year()
        );
    }
    let _ = writeln!(w, "</g>");

    let _ = writeln!(
        w,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##
    );

    let mut points = String::new();
    for (t, &v) in series.iter().enumerate() {
        if t > 0 {
            points.push(' ');
        }
        let _ = write!(points, "{:.2},{:.2}", x_at(t as f64), y_at(v));
    }
    let _ = writeln!(
        w,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>"##
    );

    for &d in dividers {
        let x = x_at(d as f64 - 0.5);
        let _ = writeln!(
            w,
            r##"<line class="change-point" x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{axis_y:.2}" stroke="#d62728" stroke-width="1.2" stroke-dasharray="6 4"/>"##
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

/// Write one chart per matrix row into `dir`, named by the row's slug.
/// `dividers[i]` holds the interior dividers of row `i`. Returns the paths in
/// row order.
pub fn render_svg_chart(matrix: &CategoryMatrix, dividers: &[Vec<usize>], dir: &Path) -> Result<Vec<PathBuf>> {
    if dividers.len() != matrix.categories().len() {
        return Err(Error::invalid(format!(
            "{} divider lists for {} categories",
            dividers.len(),
            matrix.categories().len()
        )));
    }
    let names = file_names(matrix.categories(), "svg");
    let charts: Vec<String> = matrix
        .categories()
        .iter()
        .zip(matrix.rows())
        .zip(dividers)
        .map(|((label, row), d)| svg_chart(label, matrix.start(), row, d))
        .collect::<Result<_>>()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(charts.len());
    for (name, chart) in names.iter().zip(charts) {
        let path = dir.join(name);
        fs::write(&path, chart).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Unique `slug.ext` names; later duplicates get a numeric suffix.
pub(crate) fn file_names(labels: &[String], ext: &str) -> Vec<String> {
    let mut used: Vec<String> = Vec::with_capacity(labels.len());
    for label in labels {
        let base = slug(label);
        let mut name = base.clone();
        let mut k = 2;
        while used.contains(&name) {
            name = format!("{base}-{k}");
            k += 1;
        }
        used.push(name);
    }
    used.into_iter().map(|n| format!("{n}.{ext}")).collect()
}
