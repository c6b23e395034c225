//! End to end: parse, join, validate, encode, label, highlight, compose,
//! serialize. [`Engine`] holds the immutable boundary set and is shared by
//! the CLI and the service.

use std::collections::BTreeMap;

use crate::basemap::{render_base, POLITICAL_FILL, POLITICAL_STROKE};
use crate::color::Rgb;
use crate::dataio::{join, parse_data, DataError, JoinedData};
use crate::designspace::{
    parse_spec, series_key, suggest_alternatives, validate, HighlightKind, HighlightSpec, HighlightTarget,
    InfographicSpec, InsetPlacement, Issue, LabelSpec, LabelStrategy, SpecError, Suggestion, ValidationReport,
};
use crate::encode::{encode, layout_legend, Datum, EncodeContext, EncodeError, EncodedLayer};
use crate::geodata::{parse_boundaries, world, GeoError, GeoPoint, Point, Projection, Rect, RegionSet, Shape};
use crate::highlight::{self, HighlightError};
use crate::icons;
use crate::labels::{
    aligned_margin, build_matched_legend, label_marks, measure_text, place_linked_aligned, place_linked_convenient,
    place_linked_ordered, place_situated, LabelError, LabelItem, MatchMode, MatchedEntry, ObstacleSet, PlacedLabel,
};
use crate::scales::DEFAULT_CATEGORICAL;
use crate::scene::{compose, rings_path, to_svg, Def, Geom, LayerKind, Mark, MarkTag, Paint, SceneGraph, Style, TextAnchor};

const TITLE_BAND: f64 = 28.0;
const TITLE_SIZE: f64 = 16.0;
const LEGEND_FONT: f64 = 10.0;
const LEGEND_INSET: f64 = 8.0;
const PANEL_MIN: f64 = 120.0;
/// Largest share of the viewport a label margin or panel may take.
const MARGIN_SHARE: f64 = 0.35;
/// Target on-screen size of an auto-scaled inset's content.
const INSET_TARGET: f64 = 96.0;

/// Result of a render call: SVG when the spec is valid, and the report.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub svg: Option<String>,
    pub report: ValidationReport,
}

/// A successful render with its scene and non-blocking warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub scene: SceneGraph,
    pub svg: String,
    pub warnings: Vec<Issue>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    regions: RegionSet,
}

fn spec_issue(e: SpecError) -> Issue {
    let code = match e {
        SpecError::MalformedSpec(_) => "malformed_spec",
        SpecError::UnknownChannel(_) => "unknown_channel",
        SpecError::TooManyChannels(_) => "too_many_channels",
    };
    Issue::error(code, e.to_string(), Some("spec".into()))
}

fn data_issue(e: DataError) -> Issue {
    let code = match e {
        DataError::MalformedInput(_) => "malformed_data",
        DataError::MixedKinds(_) => "mixed_kinds",
        DataError::EmptyTable => "empty_table",
        DataError::NoMatches => "no_matches",
    };
    Issue::error(code, e.to_string(), Some("data".into()))
}

fn encode_issue(e: EncodeError) -> Issue {
    let code = match e {
        EncodeError::WrongDataKind { .. } => "wrong_data_kind",
        EncodeError::TooManyIcons { .. } => "too_many_icons",
        EncodeError::MissingSeries => "missing_series",
        EncodeError::UnknownIcon(_) => "unknown_icon",
        EncodeError::UnresolvedEndpoint(_) => "unresolved_endpoint",
        EncodeError::IncompatiblePair(..) => "incompatible_channels",
    };
    Issue::error(code, e.to_string(), Some("encode".into()))
}

fn label_issue(e: LabelError) -> Issue {
    let code = match e {
        LabelError::PanelOverflow { .. } | LabelError::SideOverflow { .. } => "label_overflow",
        LabelError::NoSides | LabelError::DegenerateGuide => "missing_label_params",
        LabelError::EmptyText(_) | LabelError::IncompleteEntry(_) => "invalid_label",
    };
    Issue::error(code, e.to_string(), Some("labels".into()))
}

fn highlight_issue(i: usize, e: HighlightError) -> Issue {
    let code = match e {
        HighlightError::UnresolvedTarget(_) => "unresolved_target",
        HighlightError::UnknownRegion(_) => "unknown_highlight_target",
        HighlightError::NoRoom => "inset_no_room",
        HighlightError::InvalidScale(_) => "invalid_param",
    };
    Issue::error(code, e.to_string(), Some(format!("highlights[{i}]")))
}

fn invalid(issues: Vec<Issue>) -> ValidationReport {
    ValidationReport::from_issues(issues)
}

/// Marks of every layer, in layer order.
#[derive(Default)]
struct Layers {
    base: Vec<Mark>,
    encoding: Vec<Mark>,
    under: Vec<Mark>,
    flow: Vec<Mark>,
    over: Vec<Mark>,
    labels: Vec<Mark>,
    legend: Vec<Mark>,
    insets: Vec<Mark>,
}

impl Layers {
    fn below_insets(&self) -> impl Iterator<Item = &Mark> {
        self.base
            .iter()
            .chain(&self.encoding)
            .chain(&self.under)
            .chain(&self.flow)
            .chain(&self.over)
            .chain(&self.labels)
            .chain(&self.legend)
    }
}

/// Label texts known before layout: explicit row labels, or region names
/// when no row has one.
fn label_texts(data: &[Datum]) -> Vec<(String, String, f64)> {
    let explicit: Vec<_> = data
        .iter()
        .filter_map(|d| d.label.as_ref().map(|l| (d.key.clone(), l.trim().to_string(), d.value.unwrap_or(0.0))))
        .filter(|(_, t, _)| !t.is_empty())
        .collect();
    if !explicit.is_empty() {
        return explicit;
    }
    data.iter()
        .map(|d| (d.key.clone(), d.name.clone(), d.value.unwrap_or(0.0)))
        .collect()
}

fn is_matched(strategy: LabelStrategy) -> bool {
    matches!(
        strategy,
        LabelStrategy::MatchedText | LabelStrategy::MatchedIcon | LabelStrategy::MatchedColor
    )
}

fn flow_polyline(mark: &Mark) -> Option<Vec<Point>> {
    let Geom::Path(segs) = &mark.geom else { return None };
    let mut out = Vec::new();
    let mut last = None;
    for s in segs {
        match s {
            crate::scene::Segment::Move(p) | crate::scene::Segment::Line(p) => {
                out.push(*p);
                last = Some(*p);
            }
            crate::scene::Segment::Quad(c, p) => {
                let a = last.unwrap_or(*c);
                for k in 1..=8 {
                    let t = k as f64 / 8.0;
                    let u = 1.0 - t;
                    out.push(Point::new(
                        u * u * a.x + 2.0 * u * t * c.x + t * t * p.x,
                        u * u * a.y + 2.0 * u * t * c.y + t * t * p.y,
                    ));
                }
                last = Some(*p);
            }
            _ => {}
        }
    }
    Some(out)
}

impl Engine {
    pub fn new(regions: RegionSet) -> Self {
        Self { regions }
    }

    /// Engine over the bundled world boundaries.
    pub fn world() -> Self {
        Self::new(world())
    }

    pub fn from_boundaries(text: &str) -> Result<Self, GeoError> {
        parse_boundaries(text).map(Self::new)
    }

    pub fn regions(&self) -> &RegionSet {
        &self.regions
    }

    fn prepare(&self, spec: &str, data: &str) -> Result<(InfographicSpec, JoinedData), ValidationReport> {
        let mut issues = Vec::new();
        let spec = parse_spec(spec).map_err(spec_issue);
        let table = parse_data(data).map_err(data_issue);
        let (spec, table) = match (spec, table) {
            (Ok(s), Ok(t)) => (s, t),
            (s, t) => {
                issues.extend(s.err());
                issues.extend(t.err());
                return Err(invalid(issues));
            }
        };
        let joined = join(&self.regions, &table, Some(&spec.aliases)).map_err(|e| invalid(vec![data_issue(e)]))?;
        Ok((spec, joined))
    }

    pub fn validate(&self, spec: &str, data: &str) -> ValidationReport {
        match self.prepare(spec, data) {
            Ok((spec, joined)) => validate(&spec, &joined, &self.regions),
            Err(report) => report,
        }
    }

    /// Ranked alternatives; an empty list when the channels already work.
    /// Inputs that do not parse yield their report instead.
    pub fn suggest(&self, spec: &str, data: &str) -> Result<Vec<Suggestion>, ValidationReport> {
        let (spec, joined) = self.prepare(spec, data)?;
        let report = validate(&spec, &joined, &self.regions);
        if report.suggestions.is_empty() && report.has_code("incompatible_channels") {
            return Ok(suggest_alternatives(&spec, &joined).unwrap_or_default());
        }
        Ok(report.suggestions)
    }

    pub fn render(&self, spec: &str, data: &str) -> RenderOutput {
        let (spec, joined) = match self.prepare(spec, data) {
            Ok(v) => v,
            Err(report) => return RenderOutput { svg: None, report },
        };
        self.render_joined(&spec, &joined)
    }

    /// Validates, then renders when valid; render-stage failures are
    /// reported as errors and suppress the SVG.
    pub fn render_joined(&self, spec: &InfographicSpec, joined: &JoinedData) -> RenderOutput {
        let mut report = validate(spec, joined, &self.regions);
        if !report.is_valid() {
            return RenderOutput { svg: None, report };
        }
        match self.render_spec(spec, joined) {
            Ok(r) => {
                let mut issues = report.issues;
                issues.extend(r.warnings);
                report = ValidationReport::from_issues(issues);
                RenderOutput {
                    svg: Some(r.svg),
                    report,
                }
            }
            Err(errors) => {
                let mut issues = report.issues;
                issues.extend(errors);
                RenderOutput {
                    svg: None,
                    report: ValidationReport::from_issues(issues),
                }
            }
        }
    }

    /// Renders without validating first. Errors from any stage are returned
    /// as report issues.
    pub fn render_spec(&self, spec: &InfographicSpec, joined: &JoinedData) -> Result<Rendered, Vec<Issue>> {
        let (w, h) = (spec.viewport.width, spec.viewport.height);
        let frame = Rect::new(0.0, 0.0, w, h);
        let mut warnings = Vec::new();
        let mut defs: Vec<Def> = Vec::new();
        let mut layers = Layers::default();

        // Map area: viewport minus title band, label margins and panel.
        let mut content = frame;
        if spec.title.is_some() {
            content = Rect::new(0.0, TITLE_BAND, w, h - TITLE_BAND);
        }
        let mut map = content;
        let label_spec = spec.labels.as_ref();
        let texts = {
            // Texts do not depend on the projection; compute them from an
            // unprojected pass over the data.
            let empty = BTreeMap::new();
            let anchors: BTreeMap<String, Point> =
                self.regions.regions().iter().map(|r| (r.key.clone(), Point::new(0.0, 0.0))).collect();
            let ctx = EncodeContext {
                joined,
                shapes: &empty,
                anchors: &anchors,
                aliases: &spec.aliases,
            };
            ctx.data().map(|d| label_texts(&d)).unwrap_or_default()
        };
        let mut panel = None;
        if let Some(ls) = label_spec {
            let fs = ls.font_size();
            if ls.strategy == LabelStrategy::LinkedAligned {
                for side in ls.sides.clone().unwrap_or_default() {
                    use crate::labels::Side;
                    let vertical = matches!(side, Side::Left | Side::Right);
                    let cap = MARGIN_SHARE * if vertical { map.width } else { map.height };
                    let m = aligned_margin(texts.iter().map(|t| t.1.as_str()), side, fs).min(cap);
                    map = match side {
                        Side::Left => Rect::new(map.x + m, map.y, map.width - m, map.height),
                        Side::Right => Rect::new(map.x, map.y, map.width - m, map.height),
                        Side::Top => Rect::new(map.x, map.y + m, map.width, map.height - m),
                        Side::Bottom => Rect::new(map.x, map.y, map.width, map.height - m),
                    };
                }
            } else if is_matched(ls.strategy) {
                let widest = texts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| measure_text(&format!("{}: {}", i + 1, t.1), fs).0)
                    .fold(0.0, f64::max);
                let pw = (widest + 2.0 * fs + 40.0).clamp(PANEL_MIN, MARGIN_SHARE * w);
                map = Rect::new(map.x, map.y, map.width - pw, map.height);
                panel = Some(Rect::new(map.right(), map.y, pw, map.height));
            }
        }

        let proj = Projection::fit_rect(spec.projection, map, self.regions.bbox(), crate::geodata::DEFAULT_MARGIN);
        let shape_list: Vec<Shape> = self.regions.regions().iter().map(|r| r.project(&proj)).collect();
        let anchors: BTreeMap<String, Point> = shape_list
            .iter()
            .filter_map(|s| s.anchor().ok().map(|a| (s.key.clone(), a)))
            .collect();
        let shapes: BTreeMap<String, Shape> = shape_list.iter().map(|s| (s.key.clone(), s.clone())).collect();

        layers.base = render_base(&spec.basemap, &shape_list, spec.seed)
            .map_err(|e| vec![Issue::error("unsupported_basemap", e.to_string(), Some("basemap".into()))])?;

        let ctx = EncodeContext {
            joined,
            shapes: &shapes,
            anchors: &anchors,
            aliases: &spec.aliases,
        };
        let encoded: EncodedLayer = encode(&spec.channels, &ctx).map_err(|e| vec![encode_issue(e)])?;
        let data = ctx.data().map_err(|e| vec![encode_issue(e)])?;
        for note in &encoded.notes {
            warnings.push(Issue::warning("encoding_note", note.clone(), Some("encode".into())));
        }
        defs.extend(encoded.defs.iter().cloned());
        layers.encoding = encoded.marks.clone();
        layers.flow = encoded.flow_marks.clone();

        // Legend size is known up front so labels can avoid it.
        let legend = layout_legend(&encoded.legend, LEGEND_FONT);
        let legend_rect = (!legend.marks.is_empty()).then(|| {
            Rect::new(
                map.x + LEGEND_INSET,
                map.bottom() - LEGEND_INSET - legend.size.1,
                legend.size.0,
                legend.size.1,
            )
        });
        if let Some(r) = legend_rect {
            layers.legend = legend.translated(r.x, r.y);
            defs.extend(legend.defs.iter().cloned());
        }
        if let Some(title) = &spec.title {
            layers.legend.push(Mark::new(
                MarkTag::Legend,
                Geom::Text {
                    origin: Point::new(w / 2.0, TITLE_BAND / 2.0 + 0.35 * TITLE_SIZE),
                    lines: vec![title.clone()],
                    font_size: TITLE_SIZE,
                    anchor: TextAnchor::Middle,
                },
                Style::fill(Rgb::new(0x22, 0x22, 0x22)),
            ));
        }

        if let Some(ls) = label_spec {
            let mut obstacles = ObstacleSet::new();
            for m in layers.encoding.iter().filter(|m| m.tag != MarkTag::Region) {
                if let Some(b) = m.bbox() {
                    obstacles.add_rect(b);
                }
            }
            for m in &layers.flow {
                match (m.tag, flow_polyline(m)) {
                    (MarkTag::Flow, Some(points)) => obstacles.add_polyline(&points),
                    _ => {
                        if let Some(b) = m.bbox() {
                            obstacles.add_rect(b);
                        }
                    }
                }
            }
            if let Some(r) = legend_rect {
                obstacles.add_rect(r);
            }
            let ctx = LabelContext {
                spec: ls,
                data: &data,
                texts: &texts,
                shapes: &shapes,
                bounds: content,
                map,
                frame: content,
                panel,
                fills: &encoded.fills,
            };
            let out = place_labels(&ctx, &obstacles, &mut layers, &mut defs).map_err(|e| vec![label_issue(e)])?;
            warnings.extend(out);
        }

        let mut errors = Vec::new();
        for (i, h) in spec.highlights.iter().enumerate() {
            if h.kind == HighlightKind::ZoomedInset {
                continue;
            }
            if let Err(e) = self.apply_highlight(i, h, spec, &proj, &shapes, &anchors, &mut layers, &mut defs) {
                errors.push(highlight_issue(i, e));
            }
        }
        for (i, h) in spec.highlights.iter().enumerate() {
            if h.kind != HighlightKind::ZoomedInset {
                continue;
            }
            if let Err(e) = self.apply_inset(h, spec, frame, &mut layers) {
                errors.push(highlight_issue(i, e));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let scene = compose(
            w,
            h,
            defs,
            [
                (LayerKind::Base, layers.base),
                (LayerKind::Encoding, layers.encoding),
                (LayerKind::HighlightUnder, layers.under),
                (LayerKind::Flow, layers.flow),
                (LayerKind::HighlightOver, layers.over),
                (LayerKind::Labels, layers.labels),
                (LayerKind::Legend, layers.legend),
                (LayerKind::Insets, layers.insets),
            ],
        )
        .map_err(|e| vec![Issue::error("scene_error", e.to_string(), Some("scene".into()))])?;
        let svg = to_svg(&scene);
        Ok(Rendered { scene, svg, warnings })
    }

    fn region_key(&self, name: &str, spec: &InfographicSpec) -> Result<String, HighlightError> {
        let key = series_key(name, &spec.aliases);
        if self.regions.contains_key(&key) {
            Ok(key)
        } else {
            Err(HighlightError::UnknownRegion(name.to_string()))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_highlight(
        &self,
        index: usize,
        h: &HighlightSpec,
        spec: &InfographicSpec,
        proj: &Projection,
        shapes: &BTreeMap<String, Shape>,
        anchors: &BTreeMap<String, Point>,
        layers: &mut Layers,
        defs: &mut Vec<Def>,
    ) -> Result<(), HighlightError> {
        let point = |target: &HighlightTarget| -> Result<Point, HighlightError> {
            match target {
                HighlightTarget::Region(name) => {
                    let key = self
                        .region_key(name, spec)
                        .map_err(|_| HighlightError::UnresolvedTarget(name.clone()))?;
                    anchors.get(&key).copied().ok_or(HighlightError::UnresolvedTarget(name.clone()))
                }
                HighlightTarget::Point { lon, lat } => GeoPoint::new(*lon, *lat)
                    .map(|p| proj.project(p))
                    .map_err(|_| HighlightError::UnresolvedTarget(format!("({lon}, {lat})"))),
            }
        };
        let region = |target: &HighlightTarget| -> Result<(String, &Shape), HighlightError> {
            let HighlightTarget::Region(name) = target else {
                return Err(HighlightError::UnresolvedTarget("point".into()));
            };
            let key = self.region_key(name, spec)?;
            let shape = shapes.get(&key).ok_or(HighlightError::UnknownRegion(name.clone()))?;
            Ok((key, shape))
        };
        match h.kind {
            HighlightKind::Glow => {
                let at = point(&h.target)?;
                let (def, mark) = highlight::glow(
                    &format!("glow-{index}"),
                    at,
                    h.radius.unwrap_or(highlight::DEFAULT_GLOW_RADIUS),
                    h.color.unwrap_or(highlight::DEFAULT_GLOW_COLOR),
                );
                defs.push(def);
                layers.over.push(keyed_target(mark, &h.target, self, spec));
            }
            HighlightKind::Pin => {
                let at = point(&h.target)?;
                let (def, mut mark) = highlight::pin(at, h.height.unwrap_or(highlight::DEFAULT_PIN_HEIGHT));
                if let Some(c) = h.color {
                    mark.style = Style::fill(c);
                }
                defs.push(def);
                layers.over.push(keyed_target(mark, &h.target, self, spec));
            }
            HighlightKind::Contour => {
                let (_, shape) = region(&h.target)?;
                layers.over.push(highlight::contour(
                    shape,
                    h.color.unwrap_or(highlight::CONTOUR_COLOR),
                    h.stroke_width.unwrap_or(highlight::DEFAULT_CONTOUR_WIDTH),
                ));
            }
            HighlightKind::ContrastingColor => {
                let (key, shape) = region(&h.target)?;
                if highlight::apply_contrast(&mut layers.encoding, &key) == 0
                    && highlight::apply_contrast(&mut layers.base, &key) == 0
                {
                    let mut m = crate::basemap::region_mark(shape, POLITICAL_FILL, POLITICAL_STROKE, 0.5);
                    highlight::apply_contrast(std::slice::from_mut(&mut m), &key);
                    layers.under.push(m);
                }
            }
            HighlightKind::Extrude3D => {
                let (key, shape) = region(&h.target)?;
                let is_region = |m: &Mark| m.tag == MarkTag::Region && m.key.as_deref() == Some(key.as_str());
                let slot = if let Some(i) = layers.encoding.iter().position(is_region) {
                    Some(&mut layers.encoding[i])
                } else if let Some(i) = layers.base.iter().position(is_region) {
                    Some(&mut layers.base[i])
                } else {
                    None
                };
                match slot {
                    Some(m) => {
                        let fill = m.style.fill_color().unwrap_or(POLITICAL_FILL);
                        *m = highlight::extrude(m, shape, fill);
                    }
                    None => {
                        let original = crate::basemap::region_mark(shape, POLITICAL_FILL, POLITICAL_STROKE, 0.5);
                        layers.under.push(highlight::extrude(&original, shape, POLITICAL_FILL));
                    }
                }
            }
            HighlightKind::ZoomedInset => {}
        }
        Ok(())
    }

    fn apply_inset(
        &self,
        h: &HighlightSpec,
        spec: &InfographicSpec,
        frame: Rect,
        layers: &mut Layers,
    ) -> Result<(), HighlightError> {
        let HighlightTarget::Region(name) = &h.target else {
            return Err(HighlightError::UnresolvedTarget("point".into()));
        };
        let key = self.region_key(name, spec)?;
        let content: Vec<Mark> = layers
            .below_insets()
            .filter(|m| m.key.as_deref() == Some(key.as_str()))
            .cloned()
            .collect();
        let bbox = content
            .iter()
            .filter_map(Mark::bbox)
            .reduce(|a, b| a.union(&b))
            .ok_or(HighlightError::UnknownRegion(name.clone()))?;
        let placement = h.placement.unwrap_or(InsetPlacement::Adjacent);
        let occupied: Vec<Mark> = layers.below_insets().chain(&layers.insets).cloned().collect();
        let inset = match h.scale {
            Some(s) => highlight::build_inset(&content, s, placement, &occupied, frame)?,
            None => {
                let mut s = (INSET_TARGET / bbox.width.max(bbox.height).max(1e-9)).clamp(2.0, highlight::MAX_INSET_SCALE);
                loop {
                    match highlight::build_inset(&content, s, placement, &occupied, frame) {
                        Err(HighlightError::NoRoom) if s > 1.5 => s = (s * 0.75).max(1.25),
                        other => break other?,
                    }
                }
            }
        };
        layers.insets.extend(inset.marks);
        Ok(())
    }
}

fn keyed_target(mark: Mark, target: &HighlightTarget, engine: &Engine, spec: &InfographicSpec) -> Mark {
    match target {
        HighlightTarget::Region(name) => match engine.region_key(name, spec) {
            Ok(key) => mark.keyed(key),
            Err(_) => mark,
        },
        HighlightTarget::Point { .. } => mark,
    }
}

struct LabelContext<'a> {
    spec: &'a LabelSpec,
    data: &'a [Datum],
    texts: &'a [(String, String, f64)],
    shapes: &'a BTreeMap<String, Shape>,
    bounds: Rect,
    map: Rect,
    frame: Rect,
    panel: Option<Rect>,
    fills: &'a BTreeMap<String, Rgb>,
}

/// Places labels per strategy, appending marks; returns warnings for
/// dropped labels.
fn place_labels(
    ctx: &LabelContext,
    obstacles: &ObstacleSet,
    layers: &mut Layers,
    defs: &mut Vec<Def>,
) -> Result<Vec<Issue>, LabelError> {
    let fs = ctx.spec.font_size();
    let anchor_of: BTreeMap<&str, Point> = ctx.data.iter().map(|d| (d.key.as_str(), d.anchor)).collect();
    let mut items = Vec::new();
    for (key, text, priority) in ctx.texts {
        let Some(anchor) = anchor_of.get(key.as_str()) else { continue };
        items.push(LabelItem::new(*anchor, key.clone(), text, *priority)?);
    }
    let mut warnings = Vec::new();
    let mut placed: Vec<PlacedLabel> = Vec::new();
    let convenient = |items: &[LabelItem], obstacles: &ObstacleSet, warnings: &mut Vec<Issue>| {
        let out = place_linked_convenient(items, obstacles, Some(ctx.bounds), fs);
        if !out.dropped.is_empty() {
            warnings.push(Issue::warning(
                "label_dropped",
                format!("no room for {} label(s): {}", out.dropped.len(), out.dropped.join(", ")),
                Some("labels".into()),
            ));
        }
        out.placed
    };
    match ctx.spec.strategy {
        LabelStrategy::Situated => {
            let mut leftovers = Vec::new();
            let mut obstacles = obstacles.clone();
            for item in &items {
                let fit = ctx.shapes.get(&item.key).and_then(|s| place_situated(s, item, fs));
                match fit {
                    Some(l) if !obstacles.blocks(&l.rect) => {
                        obstacles.add_rect(l.rect);
                        placed.push(l);
                    }
                    _ => leftovers.push(item.clone()),
                }
            }
            if ctx.spec.fallback() {
                placed.extend(convenient(&leftovers, &obstacles, &mut warnings));
            } else if !leftovers.is_empty() {
                let keys: Vec<&str> = leftovers.iter().map(|i| i.key.as_str()).collect();
                warnings.push(Issue::warning(
                    "label_dropped",
                    format!("{} label(s) do not fit their region: {}", keys.len(), keys.join(", ")),
                    Some("labels".into()),
                ));
            }
        }
        LabelStrategy::LinkedConvenient => placed = convenient(&items, obstacles, &mut warnings),
        LabelStrategy::LinkedAligned => {
            placed = place_linked_aligned(&items, ctx.spec.sides.as_deref().unwrap_or(&[]), ctx.map, ctx.frame, fs)?;
        }
        LabelStrategy::LinkedOrdered => {
            placed = place_linked_ordered(&items, ctx.spec.guide.as_deref().unwrap_or(&[]), fs)?;
        }
        LabelStrategy::MatchedText | LabelStrategy::MatchedIcon | LabelStrategy::MatchedColor => {
            let mode = match ctx.spec.strategy {
                LabelStrategy::MatchedText => MatchMode::Text,
                LabelStrategy::MatchedIcon => MatchMode::Icon,
                _ => MatchMode::Color,
            };
            let icon = if mode == MatchMode::Icon {
                let def = icons::symbol(ctx.spec.icon(), None)
                    .ok_or_else(|| LabelError::IncompleteEntry(ctx.spec.icon().to_string()))?;
                let id = def.id().to_string();
                defs.push(def);
                Some(id)
            } else {
                None
            };
            let mut entries = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let color = match mode {
                    MatchMode::Color => Some(
                        ctx.fills
                            .get(&item.key)
                            .copied()
                            .unwrap_or(DEFAULT_CATEGORICAL[i % DEFAULT_CATEGORICAL.len()]),
                    ),
                    _ => None,
                };
                entries.push(MatchedEntry {
                    key: item.key.clone(),
                    anchor: item.anchor,
                    keyword: (i + 1).to_string(),
                    caption: item.text.clone(),
                    color,
                    icon: icon.clone(),
                });
            }
            if mode == MatchMode::Color {
                // Regions without a data fill take their swatch color.
                for e in &entries {
                    if ctx.fills.contains_key(&e.key) {
                        continue;
                    }
                    let (Some(c), Some(shape)) = (e.color, ctx.shapes.get(&e.key)) else { continue };
                    let mut recolored = false;
                    for m in layers.base.iter_mut().filter(|m| m.key.as_deref() == Some(e.key.as_str())) {
                        if m.tag == MarkTag::Region || m.tag == MarkTag::Dot {
                            m.style.fill = Some(Paint::Color(c));
                            recolored = true;
                        }
                    }
                    if !recolored {
                        layers.under.push(
                            Mark::new(
                                MarkTag::Region,
                                Geom::Path(rings_path(shape.rings())),
                                Style::fill(c).with_stroke(POLITICAL_STROKE, 0.5),
                            )
                            .keyed(e.key.clone()),
                        );
                    }
                }
            }
            let panel = ctx.panel.unwrap_or(ctx.frame);
            let legend = build_matched_legend(&entries, mode, panel, fs)?;
            layers.labels.extend(legend.anchor_marks);
            layers.labels.extend(legend.panel_marks);
        }
    }
    for l in &placed {
        layers.labels.extend(label_marks(l));
    }
    Ok(warnings)
}

/// One-shot render: parses `boundaries` and renders `spec` with `data`.
pub fn render(spec: &str, data: &str, boundaries: &str) -> RenderOutput {
    match Engine::from_boundaries(boundaries) {
        Ok(engine) => engine.render(spec, data),
        Err(e) => RenderOutput {
            svg: None,
            report: invalid(vec![Issue::error(
                "malformed_boundaries",
                e.to_string(),
                Some("boundaries".into()),
            )]),
        },
    }
}
