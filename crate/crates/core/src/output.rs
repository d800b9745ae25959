//! Coordinate files and SVG drawings.
//!
//! A layout file has one `id x y` line per vertex in ascending id order, with
//! coordinates printed to eight decimal places.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{LayoutError, Result};
use crate::graph::CsrGraph;
use crate::init::Layout;
use crate::model::Vec2;

pub fn format_layout(layout: &Layout) -> String {
    let mut out = String::with_capacity(layout.len() * 32);
    for (i, c) in layout.coords.iter().enumerate() {
        // normalise -0.0 so equal layouts always print identically
        let (x, y) = (c.x + 0.0, c.y + 0.0);
        writeln!(out, "{i} {x:.8} {y:.8}").unwrap();
    }
    out
}

pub fn write_layout(layout: &Layout, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_layout(layout)).map_err(|e| LayoutError::io(path, e))
}

pub fn parse_layout(text: &str) -> Result<Layout> {
    let mut entries: Vec<Option<Vec2>> = Vec::new();
    let mut count = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let bad = |reason: String| LayoutError::MalformedLayout { line: lineno, reason };
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [id, x, y] = tokens[..] else {
            return Err(bad(format!("expected `id x y`, got {} fields", tokens.len())));
        };
        let id: usize = id.parse().map_err(|e| bad(format!("bad vertex id: {e}")))?;
        let x: f64 = x.parse().map_err(|e| bad(format!("bad x: {e}")))?;
        let y: f64 = y.parse().map_err(|e| bad(format!("bad y: {e}")))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(bad("non-finite coordinate".into()));
        }
        if id >= entries.len() {
            entries.resize(id + 1, None);
        }
        if entries[id].replace(Vec2::new(x, y)).is_some() {
            return Err(bad(format!("duplicate vertex id {id}")));
        }
        count += 1;
    }
    if count != entries.len() {
        let missing = entries.iter().position(Option::is_none).unwrap_or(0);
        return Err(LayoutError::MalformedLayout {
            line: 0,
            reason: format!("missing vertex id {missing}"),
        });
    }
    Ok(Layout::new(entries.into_iter().flatten().collect()))
}

pub fn read_layout(path: impl AsRef<Path>) -> Result<Layout> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| LayoutError::io(path, e))?;
    parse_layout(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgSpec {
    /// Width and height of the square canvas in pixels.
    pub canvas: f64,
    pub margin: f64,
    pub vertex_radius: f64,
    pub stroke_width: f64,
}

impl Default for SvgSpec {
    fn default() -> Self {
        SvgSpec {
            canvas: 800.0,
            margin: 20.0,
            vertex_radius: 2.0,
            stroke_width: 0.5,
        }
    }
}

impl SvgSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.canvas, self.margin, self.vertex_radius, self.stroke_width]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
            && 2.0 * self.margin < self.canvas;
        if ok {
            Ok(())
        } else {
            Err(LayoutError::InvalidConfig(format!("invalid SVG settings {self:?}")))
        }
    }
}

/// Renders edges as `<line>` and vertices as `<circle>`, fitted into the
/// canvas with the aspect ratio preserved.
pub fn svg_string(g: &CsrGraph, layout: &Layout, spec: &SvgSpec) -> Result<String> {
    layout.check_against(g)?;
    spec.validate()?;
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for c in &layout.coords {
        lo = Vec2::new(lo.x.min(c.x), lo.y.min(c.y));
        hi = Vec2::new(hi.x.max(c.x), hi.y.max(c.y));
    }
    let inner = spec.canvas - 2.0 * spec.margin;
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let scale = if extent > 0.0 { inner / extent } else { 0.0 };
    let mid = (lo + hi) * 0.5;
    let center = spec.canvas * 0.5;
    // y grows downwards in SVG
    let map = |c: Vec2| (center + (c.x - mid.x) * scale, center - (c.y - mid.y) * scale);

    let mut out = String::new();
    let size = spec.canvas;
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r##"<g stroke="#4a4a4a" stroke-width="{}" stroke-opacity="0.6">"##,
        spec.stroke_width
    )
    .unwrap();
    for (i, j) in g.edges() {
        let (x1, y1) = map(layout.coords[i]);
        let (x2, y2) = map(layout.coords[j]);
        writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, r##"<g fill="#d62728">"##).unwrap();
    for c in &layout.coords {
        let (x, y) = map(*c);
        writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{}"/>"#, spec.vertex_radius).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

pub fn render_svg(g: &CsrGraph, layout: &Layout, spec: &SvgSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg_string(g, layout, spec)?).map_err(|e| LayoutError::io(path, e))
}
