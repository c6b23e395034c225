//! Scene graph: marks grouped into fixed-order layers, ready for SVG output.

mod svg;

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::color::Rgb;
use crate::geodata::{Point, Rect};

pub use svg::{format_coord, to_svg};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("duplicate mark id {0:?}")]
    DuplicateId(String),
    #[error("mark {mark:?} references missing definition {target:?}")]
    UnresolvedReference { mark: String, target: String },
    #[error("viewport must be positive, got {0}x{1}")]
    InvalidViewport(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Paint {
    None,
    Color(Rgb),
    /// `url(#id)` reference to a gradient definition.
    Ref(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Style {
    pub fill: Option<Paint>,
    pub stroke: Option<Rgb>,
    pub stroke_width: Option<f64>,
    pub opacity: Option<f64>,
}

impl Style {
    pub fn fill(color: Rgb) -> Self {
        Self {
            fill: Some(Paint::Color(color)),
            ..Self::default()
        }
    }

    pub fn stroke(color: Rgb, width: f64) -> Self {
        Self {
            fill: Some(Paint::None),
            stroke: Some(color),
            stroke_width: Some(width),
            opacity: None,
        }
    }

    pub fn with_stroke(mut self, color: Rgb, width: f64) -> Self {
        self.stroke = Some(color);
        self.stroke_width = Some(width);
        self
    }

    pub fn with_opacity(mut self, opacity: f64) -> Self {
        self.opacity = Some(opacity);
        self
    }

    pub fn fill_color(&self) -> Option<Rgb> {
        match self.fill {
            Some(Paint::Color(c)) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Move(Point),
    Line(Point),
    Quad(Point, Point),
    /// Circular arc of radius `r` to `to`.
    Arc { r: f64, large: bool, sweep: bool, to: Point },
    Close,
}

impl Segment {
    fn points(&self) -> Vec<Point> {
        match self {
            Segment::Move(p) | Segment::Line(p) => vec![*p],
            Segment::Quad(c, p) => vec![*c, *p],
            Segment::Arc { to, .. } => vec![*to],
            Segment::Close => vec![],
        }
    }

    fn map(&self, f: &impl Fn(Point) -> Point, scale: f64) -> Segment {
        match self {
            Segment::Move(p) => Segment::Move(f(*p)),
            Segment::Line(p) => Segment::Line(f(*p)),
            Segment::Quad(c, p) => Segment::Quad(f(*c), f(*p)),
            Segment::Arc { r, large, sweep, to } => Segment::Arc {
                r: r * scale,
                large: *large,
                sweep: *sweep,
                to: f(*to),
            },
            Segment::Close => Segment::Close,
        }
    }
}

/// Closed path through the rings of a projected shape.
pub fn rings_path<'a>(rings: impl IntoIterator<Item = &'a [Point]>) -> Vec<Segment> {
    let mut segs = Vec::new();
    for ring in rings {
        let mut pts = ring.iter();
        if let Some(first) = pts.next() {
            segs.push(Segment::Move(*first));
            segs.extend(pts.map(|p| Segment::Line(*p)));
            segs.push(Segment::Close);
        }
    }
    segs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextAnchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub tx: f64,
    pub ty: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geom {
    Path(Vec<Segment>),
    Rect { rect: Rect, rx: f64 },
    Circle { center: Point, r: f64 },
    /// `origin` is the baseline anchor of the first line.
    Text {
        origin: Point,
        lines: Vec<String>,
        font_size: f64,
        anchor: TextAnchor,
    },
    Group { children: Vec<Mark>, transform: Option<Transform> },
    IconRef { def: String, origin: Point, size: f64 },
}

/// What a mark depicts; drives restyling and occupancy decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkTag {
    Region,
    Dot,
    Bar,
    PrismTop,
    PrismFront,
    PrismSide,
    Symbol,
    Icon,
    Glyph,
    Flow,
    Arrow,
    Text,
    Label,
    Leader,
    Legend,
    Highlight,
    Frame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mark {
    pub id: Option<String>,
    /// Region (or flow edge) the mark belongs to.
    pub key: Option<String>,
    pub tag: MarkTag,
    pub geom: Geom,
    pub style: Style,
}

impl Mark {
    pub fn new(tag: MarkTag, geom: Geom, style: Style) -> Self {
        Self {
            id: None,
            key: None,
            tag,
            geom,
            style,
        }
    }

    pub fn keyed(mut self, key: impl Into<String>) -> Self {
        self.key = Some(key.into());
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    /// Conservative bounding box (control points included, stroke ignored).
    pub fn bbox(&self) -> Option<Rect> {
        match &self.geom {
            Geom::Path(segs) => {
                let mut pts: Vec<Point> = segs.iter().flat_map(Segment::points).collect();
                let arc_r = segs
                    .iter()
                    .filter_map(|s| match s {
                        Segment::Arc { r, .. } => Some(*r),
                        _ => None,
                    })
                    .fold(0.0_f64, f64::max);
                if arc_r > 0.0 {
                    let extra: Vec<Point> = pts
                        .iter()
                        .flat_map(|p| [p.offset(-arc_r, -arc_r), p.offset(arc_r, arc_r)])
                        .collect();
                    pts.extend(extra);
                }
                Rect::covering(pts)
            }
            Geom::Rect { rect, .. } => Some(*rect),
            Geom::Circle { center, r } => Some(Rect::centered(*center, 2.0 * r, 2.0 * r)),
            Geom::Text {
                origin,
                lines,
                font_size,
                anchor,
            } => {
                let width = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64 * 0.6 * font_size;
                let height = lines.len().max(1) as f64 * 1.2 * font_size;
                let x = match anchor {
                    TextAnchor::Start => origin.x,
                    TextAnchor::Middle => origin.x - width / 2.0,
                    TextAnchor::End => origin.x - width,
                };
                Some(Rect::new(x, origin.y - font_size, width, height))
            }
            Geom::Group { children, transform } => {
                let inner = children
                    .iter()
                    .filter_map(Mark::bbox)
                    .reduce(|a, b| a.union(&b))?;
                Some(match transform {
                    None => inner,
                    Some(t) => Rect::new(
                        inner.x * t.scale + t.tx,
                        inner.y * t.scale + t.ty,
                        inner.width * t.scale,
                        inner.height * t.scale,
                    ),
                })
            }
            Geom::IconRef { origin, size, .. } => Some(Rect::new(origin.x, origin.y, *size, *size)),
        }
    }

    /// Applies `p -> scale * (p - center) + center + offset` to every
    /// coordinate; lengths (radii, sizes, font sizes) scale by `scale`.
    pub fn scaled_about(&self, center: Point, scale: f64, offset: Point) -> Mark {
        let f = |p: Point| {
            Point::new(
                scale * (p.x - center.x) + center.x + offset.x,
                scale * (p.y - center.y) + center.y + offset.y,
            )
        };
        let geom = match &self.geom {
            Geom::Path(segs) => Geom::Path(segs.iter().map(|s| s.map(&f, scale)).collect()),
            Geom::Rect { rect, rx } => {
                let tl = f(Point::new(rect.x, rect.y));
                Geom::Rect {
                    rect: Rect::new(tl.x, tl.y, rect.width * scale, rect.height * scale),
                    rx: rx * scale,
                }
            }
            Geom::Circle { center: c, r } => Geom::Circle {
                center: f(*c),
                r: r * scale,
            },
            Geom::Text {
                origin,
                lines,
                font_size,
                anchor,
            } => Geom::Text {
                origin: f(*origin),
                lines: lines.clone(),
                font_size: font_size * scale,
                anchor: *anchor,
            },
            Geom::Group { children, transform } => Geom::Group {
                children: children.iter().map(|c| c.scaled_about(center, scale, offset)).collect(),
                transform: *transform,
            },
            Geom::IconRef { def, origin, size } => Geom::IconRef {
                def: def.clone(),
                origin: f(*origin),
                size: size * scale,
            },
        };
        Mark {
            id: None,
            key: self.key.clone(),
            tag: self.tag,
            geom,
            style: self.style.clone(),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Mark {
        self.scaled_about(Point::new(0.0, 0.0), 1.0, Point::new(dx, dy))
    }

    /// Every point-valued coordinate, depth first.
    pub fn vertices(&self) -> Vec<Point> {
        match &self.geom {
            Geom::Path(segs) => segs.iter().flat_map(Segment::points).collect(),
            Geom::Rect { rect, .. } => vec![Point::new(rect.x, rect.y)],
            Geom::Circle { center, .. } => vec![*center],
            Geom::Text { origin, .. } => vec![*origin],
            Geom::Group { children, .. } => children.iter().flat_map(Mark::vertices).collect(),
            Geom::IconRef { origin, .. } => vec![*origin],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientStop {
    pub offset: f64,
    pub color: Rgb,
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Def {
    /// Square symbol with a `0 0 size size` view box.
    Symbol { id: String, size: f64, path: String },
    LinearGradient { id: String, stops: Vec<GradientStop> },
    RadialGradient { id: String, stops: Vec<GradientStop> },
}

impl Def {
    pub fn id(&self) -> &str {
        match self {
            Def::Symbol { id, .. } | Def::LinearGradient { id, .. } | Def::RadialGradient { id, .. } => id,
        }
    }
}

/// Drawing layers, bottom to top. Definitions precede all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LayerKind {
    Base,
    Encoding,
    HighlightUnder,
    Flow,
    HighlightOver,
    Labels,
    Legend,
    Insets,
}

impl LayerKind {
    pub const ORDER: [LayerKind; 8] = [
        LayerKind::Base,
        LayerKind::Encoding,
        LayerKind::HighlightUnder,
        LayerKind::Flow,
        LayerKind::HighlightOver,
        LayerKind::Labels,
        LayerKind::Legend,
        LayerKind::Insets,
    ];

    /// Prefix for generated mark ids.
    pub fn prefix(self) -> &'static str {
        match self {
            LayerKind::Base => "base",
            LayerKind::Encoding => "enc",
            LayerKind::HighlightUnder => "hlu",
            LayerKind::Flow => "flow",
            LayerKind::HighlightOver => "hlo",
            LayerKind::Labels => "label",
            LayerKind::Legend => "legend",
            LayerKind::Insets => "inset",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub width: f64,
    pub height: f64,
    pub defs: Vec<Def>,
    /// One entry per [`LayerKind`], in [`LayerKind::ORDER`].
    pub layers: Vec<(LayerKind, Vec<Mark>)>,
}

impl SceneGraph {
    pub fn layer(&self, kind: LayerKind) -> &[Mark] {
        self.layers
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, m)| m.as_slice())
            .unwrap_or(&[])
    }

    pub fn mark_count(&self) -> usize {
        self.layers.iter().map(|(_, m)| m.len()).sum()
    }
}

/// Replaces characters that are not safe inside an id with `_`.
pub fn sanitize_id(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Slots layers into the fixed order, assigns deterministic ids
/// (`<layer>-<key>-<n>` for keyed marks, `<layer>-<index>` otherwise,
/// `<parent>-<i>` for group children) and checks references.
pub fn compose(
    width: f64,
    height: f64,
    defs: Vec<Def>,
    layers: impl IntoIterator<Item = (LayerKind, Vec<Mark>)>,
) -> Result<SceneGraph, SceneError> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(SceneError::InvalidViewport(width, height));
    }
    let mut slots: BTreeMap<LayerKind, Vec<Mark>> = LayerKind::ORDER.iter().map(|k| (*k, Vec::new())).collect();
    for (kind, marks) in layers {
        slots.entry(kind).or_default().extend(marks);
    }

    let mut seen: HashSet<String> = HashSet::new();
    let mut defs_out = Vec::with_capacity(defs.len());
    let mut def_ids: HashSet<String> = HashSet::new();
    for def in defs {
        // Identical definitions contributed by several stages collapse to one.
        if defs_out.contains(&def) {
            continue;
        }
        if !seen.insert(def.id().to_string()) {
            return Err(SceneError::DuplicateId(def.id().to_string()));
        }
        def_ids.insert(def.id().to_string());
        defs_out.push(def);
    }

    let mut out_layers = Vec::with_capacity(LayerKind::ORDER.len());
    for (kind, marks) in slots {
        let mut per_key: BTreeMap<String, usize> = BTreeMap::new();
        let mut assigned = Vec::with_capacity(marks.len());
        for (index, mut mark) in marks.into_iter().enumerate() {
            if mark.id.is_none() {
                mark.id = Some(match &mark.key {
                    Some(key) => {
                        let safe = sanitize_id(key);
                        let n = per_key.entry(safe.clone()).or_insert(0);
                        let id = format!("{}-{}-{}", kind.prefix(), safe, n);
                        *n += 1;
                        id
                    }
                    None => format!("{}-{}", kind.prefix(), index),
                });
            }
            finish_ids(&mut mark, &mut seen, &def_ids)?;
            assigned.push(mark);
        }
        out_layers.push((kind, assigned));
    }
    Ok(SceneGraph {
        width,
        height,
        defs: defs_out,
        layers: out_layers,
    })
}

fn finish_ids(mark: &mut Mark, seen: &mut HashSet<String>, defs: &HashSet<String>) -> Result<(), SceneError> {
    let id = mark.id.clone().unwrap_or_default();
    if !seen.insert(id.clone()) {
        return Err(SceneError::DuplicateId(id));
    }
    let missing = |target: &str| SceneError::UnresolvedReference {
        mark: id.clone(),
        target: target.to_string(),
    };
    if let Some(Paint::Ref(target)) = &mark.style.fill {
        if !defs.contains(target) {
            return Err(missing(target));
        }
    }
    match &mut mark.geom {
        Geom::IconRef { def, .. } if !defs.contains(def.as_str()) => return Err(missing(def)),
        Geom::Group { children, .. } => {
            for (i, child) in children.iter_mut().enumerate() {
                if child.id.is_none() {
                    child.id = Some(format!("{id}-{i}"));
                }
                finish_ids(child, seen, defs)?;
            }
        }
        _ => {}
    }
    Ok(())
}
