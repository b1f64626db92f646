//! Deterministic exporters: SVG renderings, CSV segment dumps, and the
//! JSON analysis document.

use crate::curve::Polyline;
use crate::dimension::Analysis;
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Stroke colors for the first three segment types, matching the usual
/// green/blue/black figure convention.
pub const DEFAULT_PALETTE: [&str; 3] = ["#007F00", "#0000BF", "#000000"];
/// Cycled for systems with more than three types.
pub const FALLBACK_PALETTE: [&str; 4] = ["#BF0000", "#BF7F00", "#7F00BF", "#007F7F"];

/// Presentation knobs for [`render_svg`].
#[derive(Debug, Clone)]
pub struct RenderStyle {
    /// Stroke colors keyed by type index; past the end the fallback
    /// palette cycles.
    pub palette: Vec<String>,
    /// Stroke width as a fraction of the bounding-box diagonal.
    pub stroke_width: f64,
    /// Padding around the curve as a fraction of the diagonal.
    pub margin: f64,
    /// Draw small direction markers at segment midpoints.
    pub show_orientation: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            palette: DEFAULT_PALETTE.iter().map(|s| s.to_string()).collect(),
            stroke_width: 0.0015,
            margin: 0.02,
            show_orientation: false,
        }
    }
}

impl RenderStyle {
    pub fn color_for(&self, type_index: usize) -> &str {
        if type_index < self.palette.len() {
            &self.palette[type_index]
        } else {
            FALLBACK_PALETTE[(type_index - self.palette.len()) % FALLBACK_PALETTE.len()]
        }
    }
}

/// Renders a polyline as an SVG 1.1 document.
///
/// One `<path>` per segment type present, class `seg-<i>`, containing that
/// type's segments as move/line pairs in traversal order. Output is
/// byte-identical across runs: coordinates are fixed at six decimals and
/// emission order is type index then traversal order. The y axis is
/// flipped so the curve appears in conventional orientation.
pub fn render_svg(polyline: &Polyline, style: &RenderStyle) -> String {
    let (min, max) = polyline
        .bounding_box()
        .expect("polyline has at least two vertices");
    // Flip y: (x, y) -> (x, -y) swaps the roles of min and max y.
    let flipped_min = Vec2::new(min.x, -max.y);
    let flipped_max = Vec2::new(max.x, -min.y);
    let diagonal = (flipped_max - flipped_min).norm();
    let pad = style.margin * diagonal;
    let view = (
        flipped_min.x - pad,
        flipped_min.y - pad,
        (flipped_max.x - flipped_min.x) + 2.0 * pad,
        (flipped_max.y - flipped_min.y) + 2.0 * pad,
    );
    let stroke = style.stroke_width * diagonal;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        fmt6(view.0),
        fmt6(view.1),
        fmt6(view.2),
        fmt6(view.3)
    )
    .unwrap();
    writeln!(
        svg,
        "<g fill=\"none\" stroke-width=\"{}\" stroke-linecap=\"round\">",
        fmt6(stroke)
    )
    .unwrap();

    let type_count = polyline
        .segment_types
        .iter()
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    for ty in 0..type_count {
        let mut d = String::new();
        for (i, &seg_ty) in polyline.segment_types.iter().enumerate() {
            if seg_ty != ty {
                continue;
            }
            let a = polyline.vertices[i];
            let b = polyline.vertices[i + 1];
            if !d.is_empty() {
                d.push(' ');
            }
            write!(
                d,
                "M {} {} L {} {}",
                fmt6(a.x),
                fmt6(-a.y),
                fmt6(b.x),
                fmt6(-b.y)
            )
            .unwrap();
        }
        if d.is_empty() {
            continue;
        }
        writeln!(
            svg,
            "<path class=\"seg-{}\" stroke=\"{}\" d=\"{}\"/>",
            ty,
            style.color_for(ty),
            d
        )
        .unwrap();
    }

    if style.show_orientation {
        svg.push_str("<g class=\"orientation\">\n");
        for (i, &ty) in polyline.segment_types.iter().enumerate() {
            let a = polyline.vertices[i];
            let b = polyline.vertices[i + 1];
            let mid = (a + b) * 0.5;
            let dir = b - a;
            let len = dir.norm();
            if len == 0.0 {
                continue;
            }
            let unit = dir * (1.0 / len);
            let normal = Vec2::new(-unit.y, unit.x);
            let tip = mid + unit * (0.18 * len);
            let base_a = mid - unit * (0.06 * len) + normal * (0.08 * len);
            let base_b = mid - unit * (0.06 * len) - normal * (0.08 * len);
            writeln!(
                svg,
                "<polygon class=\"mark-{}\" fill=\"{}\" points=\"{},{} {},{} {},{}\"/>",
                ty,
                style.color_for(ty),
                fmt6(tip.x),
                fmt6(-tip.y),
                fmt6(base_a.x),
                fmt6(-base_a.y),
                fmt6(base_b.x),
                fmt6(-base_b.y)
            )
            .unwrap();
        }
        svg.push_str("</g>\n");
    }

    svg.push_str("</g>\n</svg>\n");
    svg
}

fn fmt6(value: f64) -> String {
    let s = format!("{value:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Dumps a polyline as CSV: `index,x0,y0,x1,y1,type`, one row per segment
/// in traversal order, coordinates at nine decimals, LF line endings.
pub fn csv_export(polyline: &Polyline) -> String {
    let mut out = String::from("index,x0,y0,x1,y1,type\n");
    for (i, &ty) in polyline.segment_types.iter().enumerate() {
        let a = polyline.vertices[i];
        let b = polyline.vertices[i + 1];
        writeln!(
            out,
            "{},{:.9},{:.9},{:.9},{:.9},{}",
            i, a.x, a.y, b.x, b.y, ty
        )
        .unwrap();
    }
    out
}

/// Census row exposed in the analysis document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub k: u32,
    pub counts: Vec<u64>,
}

/// Serializable summary of a full analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub system: String,
    /// Row-major substitution matrix.
    pub matrix: Vec<Vec<u64>>,
    pub primitive_exponent: Option<u32>,
    pub lambda: f64,
    pub freq: Vec<f64>,
    pub scales: Vec<f64>,
    pub dimension: f64,
    /// `|scaling_sum(dimension) - 1|` at the reported root.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub census: Vec<CensusRow>,
}

impl AnalysisDocument {
    pub fn from_analysis(name: &str, analysis: &Analysis) -> Self {
        let n = analysis.spectral.matrix.n();
        AnalysisDocument {
            system: name.to_string(),
            matrix: (0..n)
                .map(|r| analysis.spectral.matrix.row(r).to_vec())
                .collect(),
            primitive_exponent: analysis.spectral.primitive_exponent,
            lambda: analysis.spectral.lambda,
            freq: analysis.spectral.freq.clone(),
            scales: analysis.scales.clone(),
            dimension: analysis.report.dimension,
            residual: analysis.report.residual,
            census: Vec::new(),
        }
    }
}
