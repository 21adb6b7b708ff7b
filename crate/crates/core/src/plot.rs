//! SVG rendering of two-dimensional embeddings.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::poincare::{EntityKind, PoincareModel};
use crate::vectors::KeyedVectors;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("only 2-dimensional embeddings can be plotted (got dimension {0})")]
    DimensionError(usize),
    #[error("edge endpoint '{0}' has no point")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub points: Vec<PlotPoint>,
    pub edges: Vec<(String, String)>,
    pub width: u32,
    pub height: u32,
    /// Radius of the boundary circle around the origin, when drawn.
    pub boundary: Option<f64>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN: f64 = 40.0;

impl PlotSpec {
    fn empty() -> Self {
        PlotSpec { points: Vec::new(), edges: Vec::new(), width: 800, height: 800, boundary: None }
    }

    /// Word vectors, ungrouped.
    pub fn scatter(vectors: &KeyedVectors) -> Result<Self, PlotError> {
        if vectors.dim() != 2 {
            return Err(PlotError::DimensionError(vectors.dim()));
        }
        let points = vectors
            .iter()
            .map(|(label, v)| PlotPoint { label: label.to_owned(), x: v[0], y: v[1], group: None })
            .collect();
        Ok(PlotSpec { points, ..Self::empty() })
    }

    /// Poincaré entities grouped by whether they are leaves or type nodes.
    pub fn poincare_scatter(model: &PoincareModel) -> Result<Self, PlotError> {
        if model.dim() != 2 {
            return Err(PlotError::DimensionError(model.dim()));
        }
        let points = model
            .entities()
            .iter()
            .zip(model.points())
            .map(|(label, p)| {
                let group = match model.entity_kind(label) {
                    Some(EntityKind::TypeNode) => "type",
                    _ => "entity",
                };
                let c = p.coords();
                PlotPoint { label: label.clone(), x: c[0], y: c[1], group: Some(group.to_owned()) }
            })
            .collect();
        Ok(PlotSpec { points, ..Self::empty() })
    }

    /// Poincaré entities, their relation edges and the ball boundary.
    pub fn hierarchy(model: &PoincareModel) -> Result<Self, PlotError> {
        let mut spec = Self::poincare_scatter(model)?;
        spec.edges = model.relations().pairs().to_vec();
        spec.boundary = Some(model.config().ball_radius());
        Ok(spec)
    }

    /// Renders SVG 1.1: one `<circle>` and one `<text>` per point, one
    /// `<line>` per edge and one extra `<circle>` for the boundary.
    pub fn to_svg(&self) -> Result<String, PlotError> {
        let index: HashMap<&str, &PlotPoint> = self.points.iter().map(|p| (p.label.as_str(), p)).collect();
        for (a, b) in &self.edges {
            for end in [a, b] {
                if !index.contains_key(end.as_str()) {
                    return Err(PlotError::UnknownLabel(end.clone()));
                }
            }
        }

        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = match self.boundary {
            Some(r) => (-r, r, -r, r),
            None => (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        };
        for p in &self.points {
            lo_x = lo_x.min(p.x);
            hi_x = hi_x.max(p.x);
            lo_y = lo_y.min(p.y);
            hi_y = hi_y.max(p.y);
        }
        if !lo_x.is_finite() {
            (lo_x, hi_x, lo_y, hi_y) = (-1.0, 1.0, -1.0, 1.0);
        }
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
        let scale = ((w - 2.0 * MARGIN) / span).min((h - 2.0 * MARGIN) / span);
        let (mid_x, mid_y) = ((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0);
        let px = |x: f64| w / 2.0 + (x - mid_x) * scale;
        let py = |y: f64| h / 2.0 - (y - mid_y) * scale;

        let mut groups: Vec<&str> = Vec::new();
        for g in self.points.iter().filter_map(|p| p.group.as_deref()) {
            if !groups.contains(&g) {
                groups.push(g);
            }
        }
        let colour = |p: &PlotPoint| match &p.group {
            Some(g) => PALETTE[groups.iter().position(|x| x == g).unwrap_or(0) % PALETTE.len()],
            None => PALETTE[0],
        };

        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if let Some(r) = self.boundary {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="black"/>"#,
                px(0.0),
                py(0.0),
                r * scale
            );
        }
        for (a, b) in &self.edges {
            let (a, b) = (index[a.as_str()], index[b.as_str()]);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-width="1"/>"##,
                px(a.x),
                py(a.y),
                px(b.x),
                py(b.y)
            );
        }
        for p in &self.points {
            let (x, y) = (px(p.x), py(p.y));
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#, colour(p));
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                x + 6.0,
                y - 6.0,
                escape(&p.label)
            );
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
