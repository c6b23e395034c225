use crate::color::Rgb;
use crate::geodata::{Point, Rect};
use crate::scene::{Def, GradientStop, Geom, Mark, MarkTag, Paint, Segment, Style, TextAnchor};

use super::{LegendEntry, Swatch};

const PAD: f64 = 6.0;
const ROW_GAP: f64 = 4.0;
const SWATCH_GAP: f64 = 6.0;
const RAMP_WIDTH: f64 = 60.0;
const LINE_LENGTH: f64 = 24.0;
const CAPTION_FILL: Rgb = Rgb::new(0x33, 0x33, 0x33);

/// Legend marks laid out from the origin, with their definitions and size.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendLayout {
    pub marks: Vec<Mark>,
    pub defs: Vec<Def>,
    pub size: (f64, f64),
}

impl LegendLayout {
    pub fn translated(&self, dx: f64, dy: f64) -> Vec<Mark> {
        self.marks.iter().map(|m| m.translated(dx, dy)).collect()
    }
}

fn swatch_size(s: &Swatch, fs: f64) -> (f64, f64) {
    match s {
        Swatch::Fill(_) | Swatch::Icon { .. } => (12.0, 12.0),
        Swatch::Gradient(_) => (RAMP_WIDTH, 10.0),
        Swatch::Circle { r, .. } => (2.0 * r, 2.0 * r),
        Swatch::Bar { width, height, .. } => (*width, *height),
        Swatch::Line { width, .. } => (LINE_LENGTH, width.max(fs * 0.5)),
        Swatch::None => (0.0, 0.0),
    }
}

fn legend_mark(geom: Geom, style: Style) -> Mark {
    Mark::new(MarkTag::Legend, geom, style)
}

fn swatch_marks(s: &Swatch, at: Rect, gradient_id: &str) -> (Vec<Mark>, Option<Def>) {
    let c = at.center();
    match s {
        Swatch::Fill(fill) => (vec![legend_mark(Geom::Rect { rect: at, rx: 0.0 }, Style::fill(*fill))], None),
        Swatch::Gradient(stops) => {
            let n = stops.len().max(2) - 1;
            let def = Def::LinearGradient {
                id: gradient_id.to_string(),
                stops: stops
                    .iter()
                    .enumerate()
                    .map(|(i, color)| GradientStop {
                        offset: i as f64 / n as f64,
                        color: *color,
                        opacity: 1.0,
                    })
                    .collect(),
            };
            let style = Style {
                fill: Some(Paint::Ref(gradient_id.to_string())),
                ..Style::default()
            };
            (vec![legend_mark(Geom::Rect { rect: at, rx: 0.0 }, style)], Some(def))
        }
        Swatch::Circle { r, fill } => (
            vec![legend_mark(
                Geom::Circle { center: c, r: *r },
                Style::fill(*fill).with_stroke(Rgb::WHITE, 0.5),
            )],
            None,
        ),
        Swatch::Bar { fill, .. } => (vec![legend_mark(Geom::Rect { rect: at, rx: 0.0 }, Style::fill(*fill))], None),
        Swatch::Icon { def, fill } => (
            vec![legend_mark(
                Geom::IconRef {
                    def: def.clone(),
                    origin: Point::new(at.x, at.y),
                    size: at.width,
                },
                Style::fill(*fill),
            )],
            None,
        ),
        Swatch::Line { width, color, arrow } => {
            let (x0, x1) = (at.x, at.right());
            let mut marks = vec![legend_mark(
                Geom::Path(vec![Segment::Move(Point::new(x0, c.y)), Segment::Line(Point::new(x1, c.y))]),
                Style::stroke(*color, *width),
            )];
            if *arrow {
                let hw = 2.0 + width;
                marks.push(legend_mark(
                    Geom::Path(vec![
                        Segment::Move(Point::new(x1 + 4.0 + 2.0 * width, c.y)),
                        Segment::Line(Point::new(x1, c.y - hw)),
                        Segment::Line(Point::new(x1, c.y + hw)),
                        Segment::Close,
                    ]),
                    Style::fill(*color),
                ));
            }
            (marks, None)
        }
        Swatch::None => (Vec::new(), None),
    }
}

/// Stacks entries vertically on a white panel anchored at (0, 0). Swatches
/// share a column; captions start after the widest swatch.
pub fn layout_legend(entries: &[LegendEntry], font_size: f64) -> LegendLayout {
    if entries.is_empty() {
        return LegendLayout {
            marks: Vec::new(),
            defs: Vec::new(),
            size: (0.0, 0.0),
        };
    }
    let sizes: Vec<(f64, f64)> = entries.iter().map(|e| swatch_size(&e.swatch, font_size)).collect();
    let arrow_room = entries
        .iter()
        .filter_map(|e| match e.swatch {
            Swatch::Line { width, arrow: true, .. } => Some(4.0 + 2.0 * width),
            _ => None,
        })
        .fold(0.0, f64::max);
    let col = sizes.iter().map(|s| s.0).fold(0.0, f64::max) + arrow_room;
    let text_x = PAD + if col > 0.0 { col + SWATCH_GAP } else { 0.0 };
    let mut marks = Vec::new();
    let mut defs = Vec::new();
    let mut y = PAD;
    let mut width: f64 = 0.0;
    for (i, (entry, (sw, sh))) in entries.iter().zip(&sizes).enumerate() {
        let row_h = sh.max(font_size * 1.2);
        let at = Rect::new(PAD + (col - arrow_room - sw) / 2.0, y + (row_h - sh) / 2.0, *sw, *sh);
        let (swatch, def) = swatch_marks(&entry.swatch, at, &format!("legend-ramp-{i}"));
        marks.extend(swatch);
        defs.extend(def);
        let caption_w = entry.caption.chars().count() as f64 * 0.6 * font_size;
        marks.push(legend_mark(
            Geom::Text {
                origin: Point::new(text_x, y + row_h / 2.0 + 0.35 * font_size),
                lines: vec![entry.caption.clone()],
                font_size,
                anchor: TextAnchor::Start,
            },
            Style::fill(CAPTION_FILL),
        ));
        width = width.max(text_x + caption_w + PAD);
        y += row_h + ROW_GAP;
    }
    let height = y - ROW_GAP + PAD;
    let panel = legend_mark(
        Geom::Rect {
            rect: Rect::new(0.0, 0.0, width, height),
            rx: 3.0,
        },
        Style::fill(Rgb::WHITE)
            .with_stroke(Rgb::new(0xcc, 0xcc, 0xcc), 0.5)
            .with_opacity(0.9),
    );
    marks.insert(0, panel);
    LegendLayout {
        marks,
        defs,
        size: (width, height),
    }
}
