//! Label design and placement: situated, matched (text, icon, color) and
//! linked (convenient, aligned, ordered) labels with leader lines.
//!
//! Text metrics are synthetic: every codepoint is `0.6 * font_size` wide and
//! every line `1.2 * font_size` tall.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::Rgb;
use crate::geodata::geometry::segments_intersect;
use crate::geodata::{Point, Rect, Shape};
use crate::scene::{Geom, Mark, MarkTag, Segment, Style, TextAnchor};

pub const CHAR_WIDTH: f64 = 0.6;
pub const LINE_HEIGHT: f64 = 1.2;
pub const WRAP_CODEPOINTS: usize = 24;
/// Tolerance for rect-rect and rect-segment tests.
pub const OVERLAP_EPS: f64 = 0.01;

/// First ring radius and ring step for convenient placement.
const CONVENIENT_R0: f64 = 12.0;
const CONVENIENT_STEP: f64 = 8.0;
const CONVENIENT_RINGS: usize = 5;

/// Aligned leaders: elbow distance and label distance from the map edge.
const ELBOW_GAP: f64 = 4.0;
const ALIGNED_GAP: f64 = 24.0;
const STACK_GAP: f64 = 2.0;

const LEADER_COLOR: Rgb = Rgb::new(0x55, 0x55, 0x55);
const LABEL_COLOR: Rgb = Rgb::new(0x22, 0x22, 0x22);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabelError {
    #[error("label text for {0:?} is empty")]
    EmptyText(String),
    #[error("matched legend needs {needed:.1} px but the panel has {available:.1} px")]
    PanelOverflow { needed: f64, available: f64 },
    #[error("{side:?} side needs {needed:.1} px but only {available:.1} px are available")]
    SideOverflow { side: Side, needed: f64, available: f64 },
    #[error("aligned labels need at least one side")]
    NoSides,
    #[error("guide path needs at least two points and positive length")]
    DegenerateGuide,
    #[error("matched entry {0:?} lacks the color or icon its mode requires")]
    IncompleteEntry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Situated,
    Matched,
    LinkedConvenient,
    LinkedAligned,
    LinkedOrdered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelItem {
    pub anchor: Point,
    pub key: String,
    pub text: String,
    pub priority: f64,
}

impl LabelItem {
    pub fn new(anchor: Point, key: impl Into<String>, text: &str, priority: f64) -> Result<Self, LabelError> {
        let key = key.into();
        let text = text.trim();
        if text.is_empty() {
            return Err(LabelError::EmptyText(key));
        }
        Ok(Self {
            anchor,
            key,
            text: text.to_string(),
            priority: if priority.is_finite() { priority } else { 0.0 },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedLabel {
    pub key: String,
    pub anchor: Point,
    pub rect: Rect,
    pub lines: Vec<String>,
    pub font_size: f64,
    /// Polyline from the anchor to a point on `rect`'s boundary.
    pub leader: Option<Vec<Point>>,
    pub placement: Placement,
}

/// Rectangles and segments a label may not intersect.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObstacleSet {
    pub rects: Vec<Rect>,
    pub segments: Vec<(Point, Point)>,
}

impl ObstacleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_rect(&mut self, rect: Rect) {
        self.rects.push(rect);
    }

    pub fn add_segment(&mut self, a: Point, b: Point) {
        self.segments.push((a, b));
    }

    pub fn add_polyline(&mut self, points: &[Point]) {
        for w in points.windows(2) {
            self.add_segment(w[0], w[1]);
        }
    }

    /// True when `rect` overlaps any obstacle rect or is crossed by any
    /// obstacle segment.
    pub fn blocks(&self, rect: &Rect) -> bool {
        self.rects.iter().any(|r| r.overlaps(rect, OVERLAP_EPS))
            || self
                .segments
                .iter()
                .any(|(a, b)| rect.intersects_segment(*a, *b, OVERLAP_EPS))
    }
}

/// Greedy whitespace wrap at [`WRAP_CODEPOINTS`] codepoints per line. Words
/// longer than a line stay whole.
pub fn wrap_text(text: &str) -> Vec<String> {
    wrap_to(text, WRAP_CODEPOINTS)
}

fn wrap_to(text: &str, width: usize) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        if current.is_empty() {
            current.push_str(word);
        } else if current.chars().count() + 1 + word.chars().count() <= width {
            current.push(' ');
            current.push_str(word);
        } else {
            lines.push(std::mem::take(&mut current));
            current.push_str(word);
        }
    }
    if !current.is_empty() || lines.is_empty() {
        lines.push(current);
    }
    lines
}

/// Extent `(width, height)` of already wrapped lines.
pub fn measure_lines(lines: &[String], font_size: f64) -> (f64, f64) {
    let widest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    (
        CHAR_WIDTH * font_size * widest as f64,
        LINE_HEIGHT * font_size * lines.len() as f64,
    )
}

/// Extent `(width, height)` of `text` after wrapping.
pub fn measure_text(text: &str, font_size: f64) -> (f64, f64) {
    measure_lines(&wrap_text(text), font_size)
}

/// Places the label centered on its anchor when the rectangle's corners and
/// center all lie inside the region; `None` means it does not fit.
pub fn place_situated(shape: &Shape, item: &LabelItem, font_size: f64) -> Option<PlacedLabel> {
    let lines = wrap_text(&item.text);
    let (w, h) = measure_lines(&lines, font_size);
    let rect = Rect::centered(item.anchor, w, h);
    let inside = rect.corners().iter().all(|c| shape.contains(*c)) && shape.contains(rect.center());
    inside.then(|| PlacedLabel {
        key: item.key.clone(),
        anchor: item.anchor,
        rect,
        lines,
        font_size,
        leader: None,
        placement: Placement::Situated,
    })
}

/// Compass directions clockwise from East (screen y grows downward).
const DIRECTIONS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (1.0, 1.0),
    (0.0, 1.0),
    (-1.0, 1.0),
    (-1.0, 0.0),
    (-1.0, -1.0),
    (0.0, -1.0),
    (1.0, -1.0),
];

/// Candidate rectangles in trial order: per ring, eight directions. The rect
/// touches the offset point with the edge or corner facing the anchor.
fn convenient_candidates(anchor: Point, w: f64, h: f64) -> Vec<Rect> {
    let mut out = Vec::with_capacity(8 * CONVENIENT_RINGS);
    for ring in 0..CONVENIENT_RINGS {
        let r = CONVENIENT_R0 + CONVENIENT_STEP * ring as f64;
        for (sx, sy) in DIRECTIONS {
            let norm = (sx * sx + sy * sy).sqrt();
            let o = anchor.offset(r * sx / norm, r * sy / norm);
            let x = o.x - w * (1.0 - sx) / 2.0;
            let y = o.y - h * (1.0 - sy) / 2.0;
            out.push(Rect::new(x, y, w, h));
        }
    }
    out
}

/// Result of convenient placement: labels in placement order plus the keys
/// that found no free slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvenientOutcome {
    pub placed: Vec<PlacedLabel>,
    pub dropped: Vec<String>,
}

/// Highest priority first, ties by key.
fn by_priority(items: &[LabelItem]) -> Vec<&LabelItem> {
    let mut order: Vec<&LabelItem> = items.iter().collect();
    order.sort_by(|a, b| b.priority.total_cmp(&a.priority).then_with(|| a.key.cmp(&b.key)));
    order
}

/// Greedy placement near each anchor. A candidate wins when it stays inside
/// `bounds` (if any), hits no obstacle, and its leader crosses no label
/// placed so far. Each placed label and its leader become obstacles.
pub fn place_linked_convenient(
    items: &[LabelItem],
    obstacles: &ObstacleSet,
    bounds: Option<Rect>,
    font_size: f64,
) -> ConvenientOutcome {
    let mut obstacles = obstacles.clone();
    let mut placed_rects: Vec<Rect> = Vec::new();
    let mut out = ConvenientOutcome::default();
    for item in by_priority(items) {
        let lines = wrap_text(&item.text);
        let (w, h) = measure_lines(&lines, font_size);
        let chosen = convenient_candidates(item.anchor, w, h).into_iter().find_map(|rect| {
            if bounds.is_some_and(|b| !b.contains_rect(&rect)) || obstacles.blocks(&rect) {
                return None;
            }
            let end = rect.boundary_toward(item.anchor);
            let crosses = placed_rects
                .iter()
                .any(|r| r.intersects_segment(item.anchor, end, OVERLAP_EPS));
            (!crosses).then_some((rect, end))
        });
        match chosen {
            Some((rect, end)) => {
                obstacles.add_rect(rect);
                obstacles.add_segment(item.anchor, end);
                placed_rects.push(rect);
                out.placed.push(PlacedLabel {
                    key: item.key.clone(),
                    anchor: item.anchor,
                    rect,
                    lines,
                    font_size,
                    leader: Some(vec![item.anchor, end]),
                    placement: Placement::LinkedConvenient,
                });
            }
            None => out.dropped.push(item.key.clone()),
        }
    }
    out
}

fn nearest_side(anchor: Point, map: &Rect, sides: &[Side]) -> Side {
    let distance = |s: Side| match s {
        Side::Left => anchor.x - map.x,
        Side::Right => map.right() - anchor.x,
        Side::Top => anchor.y - map.y,
        Side::Bottom => map.bottom() - anchor.y,
    };
    Side::ALL
        .into_iter()
        .filter(|s| sides.contains(s))
        .min_by(|a, b| distance(*a).total_cmp(&distance(*b)))
        .unwrap_or(Side::Right)
}

/// Order-preserving 1-D overlap removal: each interval starts as close to its
/// desired start as possible inside `[lo, hi]`.
fn stack_1d(desired: &[f64], sizes: &[f64], lo: f64, hi: f64, side: Side) -> Result<Vec<f64>, LabelError> {
    let n = desired.len();
    let needed = sizes.iter().sum::<f64>() + STACK_GAP * n.saturating_sub(1) as f64;
    if needed > hi - lo {
        return Err(LabelError::SideOverflow {
            side,
            needed,
            available: hi - lo,
        });
    }
    let mut start = vec![0.0; n];
    for i in 0..n {
        let floor = if i == 0 { lo } else { start[i - 1] + sizes[i - 1] + STACK_GAP };
        start[i] = desired[i].max(floor);
    }
    for i in (0..n).rev() {
        let ceiling = if i + 1 == n { hi - sizes[i] } else { start[i + 1] - STACK_GAP - sizes[i] };
        start[i] = start[i].min(ceiling);
    }
    Ok(start)
}

/// Labels in margin columns/rows around `map`, inside `frame`. Items go to
/// their nearest selected side, are sorted along it, and keep that order.
/// Leaders run axis-parallel from the anchor to an elbow just outside the
/// map, then straight to the label edge.
pub fn place_linked_aligned(
    items: &[LabelItem],
    sides: &[Side],
    map: Rect,
    frame: Rect,
    font_size: f64,
) -> Result<Vec<PlacedLabel>, LabelError> {
    if sides.is_empty() {
        return Err(LabelError::NoSides);
    }
    let mut out = Vec::with_capacity(items.len());
    for side in Side::ALL {
        let mut group: Vec<&LabelItem> = items
            .iter()
            .filter(|it| nearest_side(it.anchor, &map, sides) == side)
            .collect();
        if group.is_empty() {
            continue;
        }
        let vertical = matches!(side, Side::Left | Side::Right);
        group.sort_by(|a, b| {
            let (pa, pb) = if vertical { (a.anchor.y, b.anchor.y) } else { (a.anchor.x, b.anchor.x) };
            pa.total_cmp(&pb).then_with(|| a.key.cmp(&b.key))
        });
        let wrapped: Vec<Vec<String>> = group.iter().map(|it| wrap_text(&it.text)).collect();
        let extents: Vec<(f64, f64)> = wrapped.iter().map(|l| measure_lines(l, font_size)).collect();
        let sizes: Vec<f64> = extents.iter().map(|(w, h)| if vertical { *h } else { *w }).collect();
        let desired: Vec<f64> = group
            .iter()
            .zip(&sizes)
            .map(|(it, s)| if vertical { it.anchor.y } else { it.anchor.x } - s / 2.0)
            .collect();
        let (lo, hi) = if vertical { (frame.y, frame.bottom()) } else { (frame.x, frame.right()) };
        let starts = stack_1d(&desired, &sizes, lo, hi, side)?;

        // Cross-axis room in the margin.
        let depth = extents.iter().map(|(w, h)| if vertical { *w } else { *h }).fold(0.0, f64::max);
        let room = match side {
            Side::Left => map.x - ALIGNED_GAP - frame.x,
            Side::Right => frame.right() - map.right() - ALIGNED_GAP,
            Side::Top => map.y - ALIGNED_GAP - frame.y,
            Side::Bottom => frame.bottom() - map.bottom() - ALIGNED_GAP,
        };
        if depth > room {
            return Err(LabelError::SideOverflow {
                side,
                needed: depth,
                available: room.max(0.0),
            });
        }

        for (((item, lines), (w, h)), start) in group.iter().zip(wrapped).zip(&extents).zip(&starts) {
            let a = item.anchor;
            let (rect, elbow, end) = match side {
                Side::Right => {
                    let rect = Rect::new(map.right() + ALIGNED_GAP, *start, *w, *h);
                    let elbow = Point::new(map.right() + ELBOW_GAP, a.y);
                    (rect, elbow, Point::new(rect.x, rect.center().y))
                }
                Side::Left => {
                    let rect = Rect::new(map.x - ALIGNED_GAP - w, *start, *w, *h);
                    let elbow = Point::new(map.x - ELBOW_GAP, a.y);
                    (rect, elbow, Point::new(rect.right(), rect.center().y))
                }
                Side::Top => {
                    let rect = Rect::new(*start, map.y - ALIGNED_GAP - h, *w, *h);
                    let elbow = Point::new(a.x, map.y - ELBOW_GAP);
                    (rect, elbow, Point::new(rect.center().x, rect.bottom()))
                }
                Side::Bottom => {
                    let rect = Rect::new(*start, map.bottom() + ALIGNED_GAP, *w, *h);
                    let elbow = Point::new(a.x, map.bottom() + ELBOW_GAP);
                    (rect, elbow, Point::new(rect.center().x, rect.y))
                }
            };
            out.push(PlacedLabel {
                key: item.key.clone(),
                anchor: a,
                rect,
                lines,
                font_size,
                leader: Some(vec![a, elbow, end]),
                placement: Placement::LinkedAligned,
            });
        }
    }
    Ok(out)
}

/// Margin depth `side` needs so the widest (or tallest) of `texts` fits
/// beside the map with its leader gap.
pub fn aligned_margin<'a>(texts: impl IntoIterator<Item = &'a str>, side: Side, font_size: f64) -> f64 {
    let depth = texts
        .into_iter()
        .map(|t| {
            let (w, h) = measure_lines(&wrap_text(t), font_size);
            if matches!(side, Side::Left | Side::Right) {
                w
            } else {
                h
            }
        })
        .fold(0.0, f64::max);
    if depth > 0.0 {
        depth + ALIGNED_GAP + ELBOW_GAP
    } else {
        0.0
    }
}

/// Point at arc length `s` along a polyline.
fn point_at_length(guide: &[Point], s: f64) -> Point {
    let mut remaining = s;
    for w in guide.windows(2) {
        let len = w[0].distance(w[1]);
        if remaining <= len && len > 0.0 {
            return w[0].lerp(w[1], remaining / len);
        }
        remaining -= len;
    }
    *guide.last().unwrap_or(&Point::new(0.0, 0.0))
}

/// Labels centered at arc-length fractions `(i + 0.5) / n` along `guide`,
/// in priority order, with straight leaders.
pub fn place_linked_ordered(items: &[LabelItem], guide: &[Point], font_size: f64) -> Result<Vec<PlacedLabel>, LabelError> {
    let total: f64 = guide.windows(2).map(|w| w[0].distance(w[1])).sum();
    if guide.len() < 2 || total <= 0.0 || !total.is_finite() {
        return Err(LabelError::DegenerateGuide);
    }
    let order = by_priority(items);
    let n = order.len() as f64;
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let lines = wrap_text(&item.text);
            let (w, h) = measure_lines(&lines, font_size);
            let center = point_at_length(guide, (i as f64 + 0.5) / n * total);
            let rect = Rect::centered(center, w, h);
            let end = rect.boundary_toward(item.anchor);
            PlacedLabel {
                key: item.key.clone(),
                anchor: item.anchor,
                rect,
                lines,
                font_size,
                leader: Some(vec![item.anchor, end]),
                placement: Placement::LinkedOrdered,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Text,
    Icon,
    Color,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedEntry {
    pub key: String,
    pub anchor: Point,
    /// Short prompt shown on the map (text mode).
    pub keyword: String,
    pub caption: String,
    pub color: Option<Rgb>,
    /// Symbol definition id (icon mode).
    pub icon: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedLegend {
    pub rows: Vec<Rect>,
    pub panel_marks: Vec<Mark>,
    pub anchor_marks: Vec<Mark>,
}

const PANEL_PAD: f64 = 8.0;
const ROW_GAP: f64 = 6.0;

/// Lays matched entries out top to bottom in `panel` and emits the matching
/// prompt at each anchor (keyword, small icon, or nothing for color mode
/// where the region fill itself is the prompt).
pub fn build_matched_legend(
    entries: &[MatchedEntry],
    mode: MatchMode,
    panel: Rect,
    font_size: f64,
) -> Result<MatchedLegend, LabelError> {
    let swatch = match mode {
        MatchMode::Text => 0.0,
        MatchMode::Icon => 2.0 * font_size,
        MatchMode::Color => LINE_HEIGHT * font_size,
    };
    let text_x = panel.x + PANEL_PAD + if swatch > 0.0 { swatch + ROW_GAP } else { 0.0 };
    let chars = (((panel.right() - PANEL_PAD - text_x) / (CHAR_WIDTH * font_size)).floor() as usize).max(8);

    let mut rows = Vec::with_capacity(entries.len());
    let mut panel_marks = Vec::new();
    let mut anchor_marks = Vec::new();
    let mut y = panel.y + PANEL_PAD;
    for entry in entries {
        let text = match mode {
            MatchMode::Text => format!("{}: {}", entry.keyword, entry.caption),
            _ => entry.caption.clone(),
        };
        let lines = wrap_to(text.trim(), chars);
        let (tw, th) = measure_lines(&lines, font_size);
        let row_h = th.max(swatch);
        let row = Rect::new(panel.x + PANEL_PAD, y, text_x - panel.x - PANEL_PAD + tw, row_h);
        match mode {
            MatchMode::Text => {
                anchor_marks.push(text_mark(
                    &entry.key,
                    Point::new(entry.anchor.x, entry.anchor.y + 0.35 * font_size),
                    vec![entry.keyword.clone()],
                    font_size,
                    TextAnchor::Middle,
                ));
            }
            MatchMode::Icon => {
                let def = entry.icon.clone().ok_or_else(|| LabelError::IncompleteEntry(entry.key.clone()))?;
                let color = entry.color.unwrap_or(LABEL_COLOR);
                let small = LINE_HEIGHT * font_size;
                anchor_marks.push(icon_mark(&entry.key, &def, Rect::centered(entry.anchor, small, small), color));
                panel_marks.push(icon_mark(&entry.key, &def, Rect::new(row.x, y, swatch, swatch), color));
            }
            MatchMode::Color => {
                let color = entry.color.ok_or_else(|| LabelError::IncompleteEntry(entry.key.clone()))?;
                panel_marks.push(
                    Mark::new(
                        MarkTag::Legend,
                        Geom::Rect {
                            rect: Rect::new(row.x, y, swatch, swatch),
                            rx: 0.0,
                        },
                        Style::fill(color),
                    )
                    .keyed(entry.key.clone()),
                );
            }
        }
        panel_marks.push(text_mark(
            &entry.key,
            Point::new(text_x, y + font_size),
            lines,
            font_size,
            TextAnchor::Start,
        ));
        rows.push(row);
        y += row_h + ROW_GAP;
    }
    let needed = y - ROW_GAP + PANEL_PAD - panel.y;
    if needed > panel.height {
        return Err(LabelError::PanelOverflow {
            needed,
            available: panel.height,
        });
    }
    Ok(MatchedLegend {
        rows,
        panel_marks,
        anchor_marks,
    })
}

fn text_mark(key: &str, origin: Point, lines: Vec<String>, font_size: f64, anchor: TextAnchor) -> Mark {
    Mark::new(
        MarkTag::Label,
        Geom::Text {
            origin,
            lines,
            font_size,
            anchor,
        },
        Style::fill(LABEL_COLOR),
    )
    .keyed(key)
}

fn icon_mark(key: &str, def: &str, rect: Rect, color: Rgb) -> Mark {
    Mark::new(
        MarkTag::Icon,
        Geom::IconRef {
            def: def.to_string(),
            origin: Point::new(rect.x, rect.y),
            size: rect.width,
        },
        Style::fill(color),
    )
    .keyed(key)
}

/// Scene marks for a placed label: leader (if any) then text.
pub fn label_marks(label: &PlacedLabel) -> Vec<Mark> {
    let mut marks = Vec::with_capacity(2);
    if let Some(leader) = &label.leader {
        let mut segs = Vec::with_capacity(leader.len());
        for (i, p) in leader.iter().enumerate() {
            segs.push(if i == 0 { Segment::Move(*p) } else { Segment::Line(*p) });
        }
        marks.push(
            Mark::new(MarkTag::Leader, Geom::Path(segs), Style::stroke(LEADER_COLOR, 0.75)).keyed(label.key.clone()),
        );
    }
    marks.push(text_mark(
        &label.key,
        Point::new(label.rect.x, label.rect.y + label.font_size),
        label.lines.clone(),
        label.font_size,
        TextAnchor::Start,
    ));
    marks
}

/// Number of properly crossing leader pairs (segments sharing an endpoint
/// are not counted).
pub fn leader_crossings(labels: &[PlacedLabel]) -> usize {
    let segments: Vec<(usize, Point, Point)> = labels
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            l.leader
                .iter()
                .flat_map(move |pts| pts.windows(2).map(move |w| (i, w[0], w[1])))
        })
        .collect();
    let mut count = 0;
    for (a, sa) in segments.iter().enumerate() {
        for sb in &segments[a + 1..] {
            if sa.0 != sb.0 && segments_intersect(sa.1, sa.2, sb.1, sb.2) {
                count += 1;
            }
        }
    }
    count
}
