//! Encoding channels: joined data to marks, plus dual encoding.
//!
//! Every encoder works on a list of [`Datum`]s sorted by key, so row order
//! in the input never changes mark order. Geometric encoders also report a
//! [`Footprint`] per key so a second mark set can be stacked beneath.

mod color;
mod flow;
mod legend;
mod marks;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::color::Rgb;
use crate::dataio::{DataValue, FieldKind, JoinedData};
use crate::designspace::{check_compatibility, ChannelKind, ChannelSpec};
use crate::geodata::{Point, Shape};
use crate::scales::DEFAULT_CATEGORICAL;
use crate::scene::{format_coord, Def, Geom, Mark, MarkTag, Paint};

pub use color::{assign_colors, encode_color, ColorAssignment, ColorMode};
pub use flow::{control_point, encode_flow, flow_midpoint};
pub use legend::{layout_legend, LegendLayout};
pub use marks::{
    dorling_relax, encode_glyph, encode_length2d, encode_length3d, encode_quantity, encode_size, encode_text,
    max_overlap_ratio, DorlingCircle, DorlingResult, DORLING_MAX_PASSES, DORLING_TOLERANCE,
};

/// Fill for geometric marks when no color is given.
pub const DEFAULT_MARK_COLOR: Rgb = DEFAULT_CATEGORICAL[0];
/// Vertical gap between stacked mark sets.
pub const STACK_GAP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("{channel:?} needs {expected} data")]
    WrongDataKind { channel: ChannelKind, expected: &'static str },
    #[error("region {key:?} would need {count} icons")]
    TooManyIcons { key: String, count: usize },
    #[error("mini-chart glyph has no series")]
    MissingSeries,
    #[error("unknown icon {0:?}")]
    UnknownIcon(String),
    #[error("flow endpoint {0:?} has no anchor")]
    UnresolvedEndpoint(String),
    #[error("{0:?} and {1:?} cannot be combined")]
    IncompatiblePair(ChannelKind, ChannelKind),
}

/// One encodable item: a region row, or a flow edge keyed `from>to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    pub key: String,
    pub name: String,
    pub anchor: Point,
    pub value: Option<f64>,
    pub category: Option<String>,
    pub label: Option<String>,
    /// Input row position, used only for first-appearance category order.
    pub order: usize,
}

/// Vertical extent a key's marks occupy around their anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub anchor: Point,
    pub above: f64,
    pub below: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Swatch {
    Fill(Rgb),
    Gradient(Vec<Rgb>),
    Circle { r: f64, fill: Rgb },
    Bar { width: f64, height: f64, fill: Rgb },
    Icon { def: String, fill: Rgb },
    Line { width: f64, color: Rgb, arrow: bool },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendEntry {
    pub swatch: Swatch,
    pub caption: String,
}

impl LegendEntry {
    pub fn new(swatch: Swatch, caption: impl Into<String>) -> Self {
        Self {
            swatch,
            caption: caption.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedLayer {
    pub channels: Vec<ChannelKind>,
    /// Marks for the encoding layer.
    pub marks: Vec<Mark>,
    /// Flow curves and arrowheads, drawn in their own layer.
    pub flow_marks: Vec<Mark>,
    pub defs: Vec<Def>,
    pub legend: Vec<LegendEntry>,
    pub footprints: BTreeMap<String, Footprint>,
    /// Region fills assigned by a color channel.
    pub fills: BTreeMap<String, Rgb>,
    pub notes: Vec<String>,
}

impl EncodedLayer {
    pub fn new(channel: ChannelKind) -> Self {
        Self {
            channels: vec![channel],
            marks: Vec::new(),
            flow_marks: Vec::new(),
            defs: Vec::new(),
            legend: Vec::new(),
            footprints: BTreeMap::new(),
            fills: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn all_marks(&self) -> impl Iterator<Item = &Mark> {
        self.marks.iter().chain(&self.flow_marks)
    }
}

/// Everything encoders read: joined data and projected geometry.
pub struct EncodeContext<'a> {
    pub joined: &'a JoinedData,
    pub shapes: &'a BTreeMap<String, Shape>,
    pub anchors: &'a BTreeMap<String, Point>,
    pub aliases: &'a BTreeMap<String, String>,
}

impl EncodeContext<'_> {
    /// Region rows (or flow edges) as data, sorted by key. Rows whose region
    /// has no anchor are skipped.
    pub fn data(&self) -> Result<Vec<Datum>, EncodeError> {
        let mut out = Vec::new();
        if self.joined.field_kind == FieldKind::Flow {
            for (order, edge) in self.joined.flows.iter().enumerate() {
                let from = *self
                    .anchors
                    .get(&edge.from)
                    .ok_or_else(|| EncodeError::UnresolvedEndpoint(edge.from.clone()))?;
                let to = *self
                    .anchors
                    .get(&edge.to)
                    .ok_or_else(|| EncodeError::UnresolvedEndpoint(edge.to.clone()))?;
                out.push(Datum {
                    key: edge.key(),
                    name: format!("{} to {}", edge.from, edge.to),
                    anchor: flow_midpoint(from, to),
                    value: Some(edge.magnitude),
                    category: None,
                    label: edge.label.clone(),
                    order,
                });
            }
        } else {
            for (order, row) in self.joined.matched.iter().enumerate() {
                let Some(anchor) = self.anchors.get(&row.key) else { continue };
                let (value, category) = match &row.row.value {
                    DataValue::Quantitative(v) => (Some(*v), row.row.category.clone()),
                    DataValue::Categorical(c) => (None, Some(c.clone())),
                };
                out.push(Datum {
                    key: row.key.clone(),
                    name: row.region_name.clone(),
                    anchor: *anchor,
                    value,
                    category,
                    label: row.row.label.clone(),
                    order,
                });
            }
        }
        out.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(out)
    }
}

/// `1234567` -> `"1,234,567"`, `3.14159` -> `"3.14"`: half away from zero to
/// at most two decimals, thousands separators, no locale.
pub fn format_number(v: f64) -> String {
    let fixed = format_coord(v);
    let (sign, body) = match fixed.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", fixed.as_str()),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let frac = frac.trim_end_matches('0');
    let digits: Vec<char> = int.chars().collect();
    let mut grouped = String::new();
    for (i, d) in digits.iter().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(*d);
    }
    if frac.is_empty() {
        format!("{sign}{grouped}")
    } else {
        format!("{sign}{grouped}.{frac}")
    }
}

pub(crate) fn require_values(data: &[Datum], channel: ChannelKind) -> Result<Vec<f64>, EncodeError> {
    data.iter()
        .map(|d| {
            d.value.filter(|v| v.is_finite()).ok_or(EncodeError::WrongDataKind {
                channel,
                expected: "quantitative",
            })
        })
        .collect()
}

fn encode_single(spec: &ChannelSpec, data: &[Datum], ctx: &EncodeContext) -> Result<EncodedLayer, EncodeError> {
    match spec.kind {
        ChannelKind::ColorIntensity => encode_color(data, ctx.shapes, spec, ColorMode::Intensity),
        ChannelKind::ColorHue => encode_color(data, ctx.shapes, spec, ColorMode::Hue),
        ChannelKind::Length2D => encode_length2d(data, spec),
        ChannelKind::Length3D => encode_length3d(data, spec),
        ChannelKind::Size => encode_size(data, spec),
        ChannelKind::Quantity => encode_quantity(data, spec),
        ChannelKind::Glyph => encode_glyph(data, spec, ctx.aliases),
        ChannelKind::Text => Ok(encode_text(data, spec)),
        ChannelKind::DirectionalFlow | ChannelKind::NonDirectionalFlow => {
            if ctx.joined.field_kind != FieldKind::Flow {
                return Err(EncodeError::WrongDataKind {
                    channel: spec.kind,
                    expected: "flow",
                });
            }
            encode_flow(
                &ctx.joined.flows,
                ctx.anchors,
                spec.kind == ChannelKind::DirectionalFlow,
                spec,
            )
        }
    }
}

/// Draw order for a dual pair: flows, other geometric marks, color, text.
fn rank(kind: ChannelKind) -> u8 {
    if kind.is_flow() {
        0
    } else if kind.is_geometric() {
        1
    } else if kind.is_color() {
        2
    } else {
        3
    }
}

/// Encodes one channel, or two under dual encoding.
pub fn encode(channels: &[ChannelSpec], ctx: &EncodeContext) -> Result<EncodedLayer, EncodeError> {
    let data = ctx.data()?;
    match channels {
        [only] => encode_single(only, &data, ctx),
        [a, b] => {
            let (first, second) = if rank(b.kind) < rank(a.kind) { (b, a) } else { (a, b) };
            let layer = encode_single(first, &data, ctx)?;
            apply_dual(layer, first, second, &data, ctx)
        }
        _ => Ok(EncodedLayer::new(ChannelKind::Text)),
    }
}

/// Adds `second` to an already encoded `first` layer. Color restyles the
/// geometric marks; text and geometric marks are stacked below the first
/// set per key; a size channel resizes glyphs instead of stacking.
pub fn apply_dual(
    mut layer: EncodedLayer,
    first: &ChannelSpec,
    second: &ChannelSpec,
    data: &[Datum],
    ctx: &EncodeContext,
) -> Result<EncodedLayer, EncodeError> {
    let monochrome = [first, second]
        .iter()
        .find(|c| c.kind == ChannelKind::Glyph)
        .is_none_or(|g| g.is_monochrome());
    if !check_compatibility(first.kind, second.kind, monochrome).is_compatible() {
        return Err(EncodeError::IncompatiblePair(first.kind, second.kind));
    }
    layer.channels.push(second.kind);

    if second.kind.is_color() && first.kind.is_geometric() {
        let mode = if second.kind == ChannelKind::ColorIntensity {
            ColorMode::Intensity
        } else {
            ColorMode::Hue
        };
        let colors = assign_colors(data, second, mode)?;
        for mark in layer.marks.iter_mut().chain(layer.flow_marks.iter_mut()) {
            if let Some(c) = mark.key.as_ref().and_then(|k| colors.fills.get(k)) {
                restyle(mark, *c);
            }
        }
        for entry in &mut layer.legend {
            recolor_swatch(&mut entry.swatch, colors.representative);
        }
        layer.legend.extend(colors.legend);
        return Ok(layer);
    }

    if first.kind == ChannelKind::Glyph && second.kind == ChannelKind::Size {
        return marks::resize_glyphs(layer, second, data);
    }

    let extra = encode_single(second, data, ctx)?;
    stack_below(&mut layer, extra);
    Ok(layer)
}

/// Appends `second`'s marks, moving each key's marks so they start
/// [`STACK_GAP`] px under the first set's footprint.
fn stack_below(first: &mut EncodedLayer, mut second: EncodedLayer) {
    for mark in second.marks.iter_mut().chain(second.flow_marks.iter_mut()) {
        let Some(key) = mark.key.clone() else { continue };
        let (Some(a), Some(b)) = (first.footprints.get(&key), second.footprints.get(&key)) else {
            continue;
        };
        let target = Point::new(a.anchor.x, a.anchor.y + a.below + STACK_GAP + b.above);
        *mark = mark.translated(target.x - b.anchor.x, target.y - b.anchor.y);
    }
    for (key, b) in &second.footprints {
        if let Some(a) = first.footprints.get_mut(key) {
            a.below += STACK_GAP + b.above + b.below;
        }
    }
    first.marks.extend(second.marks);
    first.flow_marks.extend(second.flow_marks);
    first.defs.extend(second.defs);
    first.legend.extend(second.legend);
    first.notes.extend(second.notes);
    first.fills.extend(second.fills);
}

/// Applies a data color to a geometric mark according to its role.
fn restyle(mark: &mut Mark, c: Rgb) {
    match mark.tag {
        MarkTag::PrismTop => mark.style.fill = Some(Paint::Color(c)),
        MarkTag::PrismFront => mark.style.fill = Some(Paint::Color(c.darken(0.6))),
        MarkTag::PrismSide => mark.style.fill = Some(Paint::Color(c.darken(0.75))),
        MarkTag::Flow => mark.style.stroke = Some(c),
        MarkTag::Text | MarkTag::Label => {}
        MarkTag::Glyph => {
            if let Geom::Group { children, .. } = &mut mark.geom {
                for child in children {
                    restyle(child, c);
                }
            }
        }
        _ => mark.style.fill = Some(Paint::Color(c)),
    }
}

/// Magnitude swatches drop their fixed color once a color channel takes over.
fn recolor_swatch(swatch: &mut Swatch, c: Rgb) {
    match swatch {
        Swatch::Circle { fill, .. } | Swatch::Bar { fill, .. } | Swatch::Icon { fill, .. } => *fill = c,
        Swatch::Line { color, .. } => *color = c,
        _ => {}
    }
}
