use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::training::Point;

const SIZE: f64 = 480.0;
const PAD: f64 = 20.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// `[lo, hi]` per axis: data bounds plus a 5% margin. A zero-width axis is
/// widened to a unit box around its value; no points gives the unit box
/// around the origin.
fn bounds(points: &[Point]) -> [(f64, f64); 2] {
    let mut out = [(0.0, 0.0); 2];
    for (axis, b) in out.iter_mut().enumerate() {
        let lo = points.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
        *b = if points.is_empty() {
            (-1.0, 1.0)
        } else if hi > lo {
            let m = 0.05 * (hi - lo);
            (lo - m, hi + m)
        } else {
            (lo - 1.0, hi + 1.0)
        };
    }
    out
}

/// Renders a scatter plot. `groups[k]` picks the colour class of point `k`;
/// an empty `groups` puts everything in group 0.
pub fn render_scatter(points: &[Point], groups: &[usize]) -> Result<String> {
    if !groups.is_empty() && groups.len() != points.len() {
        return Err(Error::ShapeMismatch {
            expected: points.len(),
            actual: groups.len(),
        });
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidConfig("scatter points must be finite".into()));
    }
    let [(x0, x1), (y0, y1)] = bounds(points);
    let inner = SIZE - 2.0 * PAD;
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * inner;
    let sy = |y: f64| PAD + (y1 - y) / (y1 - y0) * inner;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    s.push_str("<style>");
    for (k, c) in PALETTE.iter().enumerate() {
        write!(s, ".g{k}{{fill:{c}}}").unwrap();
    }
    s.push_str("</style>\n");
    writeln!(s, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{inner}" height="{inner}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    if x0 < 0.0 && x1 > 0.0 {
        let x = sx(0.0);
        writeln!(s, r##"<line x1="{x:.3}" y1="{PAD}" x2="{x:.3}" y2="{}" stroke="#bbb"/>"##, SIZE - PAD).unwrap();
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = sy(0.0);
        writeln!(s, r##"<line x1="{PAD}" y1="{y:.3}" x2="{}" y2="{y:.3}" stroke="#bbb"/>"##, SIZE - PAD).unwrap();
    }
    for (k, p) in points.iter().enumerate() {
        let g = groups.get(k).copied().unwrap_or(0) % PALETTE.len();
        writeln!(s, r#"<circle class="g{g}" cx="{:.3}" cy="{:.3}" r="2"/>"#, sx(p[0]), sy(p[1])).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_scatter(points: &[Point], groups: &[usize], path: &Path) -> Result<()> {
    write_atomic(path, render_scatter(points, groups)?.as_bytes())
}
