//! Highlighting techniques: glow, pin, contrasting color, contour,
//! extrusion and zoomed insets.

use thiserror::Error;

use crate::color::Rgb;
use crate::designspace::InsetPlacement;
use crate::geodata::{point_in_rings, Point, Rect, Shape};
use crate::icons;
use crate::scene::{rings_path, Def, GradientStop, Geom, Mark, MarkTag, Paint, Segment, Style};

pub const DEFAULT_GLOW_RADIUS: f64 = 6.0;
pub const DEFAULT_GLOW_COLOR: Rgb = Rgb::new(0xff, 0xc1, 0x07);
pub const DEFAULT_PIN_HEIGHT: f64 = 18.0;
pub const PIN_COLOR: Rgb = Rgb::new(0xd3, 0x2f, 0x2f);
pub const DEFAULT_CONTOUR_WIDTH: f64 = 2.5;
pub const CONTOUR_COLOR: Rgb = Rgb::new(0x22, 0x22, 0x22);
pub const EXTRUDE_OFFSET: (f64, f64) = (3.0, -3.0);
pub const INSET_PADDING: f64 = 6.0;
pub const MAX_INSET_SCALE: f64 = 8.0;
pub const GRID: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HighlightError {
    #[error("highlight target {0:?} does not resolve")]
    UnresolvedTarget(String),
    #[error("no region {0:?} in the scene")]
    UnknownRegion(String),
    #[error("no empty space large enough for the inset")]
    NoRoom,
    #[error("inset scale must be in (1, 8], got {0}")]
    InvalidScale(f64),
}

/// Radial-gradient glow: opaque out to `r`, transparent at `3r`.
pub fn glow(id: &str, center: Point, r: f64, color: Rgb) -> (Def, Mark) {
    let def = Def::RadialGradient {
        id: id.to_string(),
        stops: vec![
            GradientStop {
                offset: 0.0,
                color,
                opacity: 1.0,
            },
            GradientStop {
                offset: 1.0 / 3.0,
                color,
                opacity: 1.0,
            },
            GradientStop {
                offset: 1.0,
                color,
                opacity: 0.0,
            },
        ],
    };
    let style = Style {
        fill: Some(Paint::Ref(id.to_string())),
        ..Style::default()
    };
    (def, Mark::new(MarkTag::Highlight, Geom::Circle { center, r: 3.0 * r }, style))
}

/// Pin icon of height `h` whose tip touches `tip`.
pub fn pin(tip: Point, h: f64) -> (Def, Mark) {
    let def = icons::symbol("pin", None).expect("pin is built in");
    let mark = Mark::new(
        MarkTag::Highlight,
        Geom::IconRef {
            def: def.id().to_string(),
            origin: Point::new(tip.x - h / 2.0, tip.y - h),
            size: h,
        },
        Style::fill(PIN_COLOR),
    );
    (def, mark)
}

/// Opposite hue, saturated, mid lightness.
pub fn contrast_color(current: Rgb) -> Rgb {
    let (h, _, _) = current.to_hsl();
    Rgb::from_hsl((h + 180.0) % 360.0, 0.9, 0.5)
}

/// Sets the contrasting fill on every non-text mark of `key` in `marks`.
/// Returns how many marks changed.
pub fn apply_contrast(marks: &mut [Mark], key: &str) -> usize {
    let mut n = 0;
    for m in marks.iter_mut().filter(|m| m.key.as_deref() == Some(key)) {
        n += contrast_mark(m);
    }
    n
}

fn contrast_mark(m: &mut Mark) -> usize {
    match (&mut m.geom, m.tag) {
        (_, MarkTag::Text | MarkTag::Label | MarkTag::Leader) => 0,
        (Geom::Group { children, .. }, _) => children.iter_mut().map(contrast_mark).sum(),
        (_, MarkTag::Flow) => {
            let Some(c) = m.style.stroke else { return 0 };
            m.style.stroke = Some(contrast_color(c));
            1
        }
        _ => {
            let Some(c) = m.style.fill_color() else { return 0 };
            m.style.fill = Some(Paint::Color(contrast_color(c)));
            1
        }
    }
}

/// Unfilled outline of the region.
pub fn contour(shape: &Shape, color: Rgb, width: f64) -> Mark {
    Mark::new(MarkTag::Highlight, Geom::Path(rings_path(shape.rings())), Style::stroke(color, width))
        .keyed(shape.key.clone())
}

/// Lifted region: a darkened copy offset by (3, -3), quads joining each
/// edge to its copy, and the original path on top.
pub fn extrude(original: &Mark, shape: &Shape, fill: Rgb) -> Mark {
    let (dx, dy) = EXTRUDE_OFFSET;
    let dark = fill.darken(0.6);
    let mut children = vec![Mark::new(
        MarkTag::Highlight,
        Geom::Path(rings_path(shape.rings())),
        Style::fill(dark),
    )
    .translated(dx, dy)];
    for ring in shape.rings() {
        for (i, a) in ring.iter().enumerate() {
            let b = ring[(i + 1) % ring.len()];
            children.push(Mark::new(
                MarkTag::Highlight,
                Geom::Path(vec![
                    Segment::Move(*a),
                    Segment::Line(b),
                    Segment::Line(b.offset(dx, dy)),
                    Segment::Line(a.offset(dx, dy)),
                    Segment::Close,
                ]),
                Style::fill(dark),
            ));
        }
    }
    children.push(original.clone());
    let children = children.into_iter().map(|m| m.keyed(shape.key.clone())).collect();
    Mark::new(
        MarkTag::Highlight,
        Geom::Group {
            children,
            transform: None,
        },
        Style::default(),
    )
    .keyed(shape.key.clone())
}

/// Which cells of a `GRID` x `GRID` partition of `viewport` hold ink.
pub fn occupancy(marks: &[Mark], viewport: Rect) -> [[bool; GRID]; GRID] {
    let mut grid = [[false; GRID]; GRID];
    let (cw, ch) = (viewport.width / GRID as f64, viewport.height / GRID as f64);
    let cell_of = |p: Point| -> Option<(usize, usize)> {
        let i = ((p.x - viewport.x) / cw).floor();
        let j = ((p.y - viewport.y) / ch).floor();
        (i >= 0.0 && j >= 0.0 && i < GRID as f64 && j < GRID as f64).then_some((i as usize, j as usize))
    };
    let step = cw.min(ch) / 2.0;
    for m in marks {
        mark_cells(m, viewport, cw, ch, step, &cell_of, &mut grid);
    }
    grid
}

fn mark_cells(
    m: &Mark,
    viewport: Rect,
    cw: f64,
    ch: f64,
    step: f64,
    cell_of: &impl Fn(Point) -> Option<(usize, usize)>,
    grid: &mut [[bool; GRID]; GRID],
) {
    match &m.geom {
        Geom::Group { children, transform: None } => {
            for c in children {
                mark_cells(c, viewport, cw, ch, step, cell_of, grid);
            }
        }
        Geom::Path(segs) => {
            let mut rings: Vec<Vec<Point>> = Vec::new();
            let mut last = None;
            for s in segs {
                let pts = match s {
                    Segment::Move(p) => {
                        rings.push(vec![*p]);
                        vec![*p]
                    }
                    Segment::Line(p) | Segment::Arc { to: p, .. } => sample(last, *p, step),
                    Segment::Quad(c, p) => {
                        let mut v = sample(last, *c, step);
                        v.extend(sample(Some(*c), *p, step));
                        v
                    }
                    Segment::Close => {
                        let first = rings.last().and_then(|r| r.first().copied());
                        first.map_or(Vec::new(), |f| sample(last, f, step))
                    }
                };
                for p in &pts {
                    if let Some((i, j)) = cell_of(*p) {
                        grid[j][i] = true;
                    }
                }
                match s {
                    Segment::Move(p) | Segment::Line(p) | Segment::Quad(_, p) | Segment::Arc { to: p, .. } => {
                        if let Some(r) = rings.last_mut() {
                            if !matches!(s, Segment::Move(_)) {
                                r.push(*p);
                            }
                        }
                        last = Some(*p);
                    }
                    Segment::Close => {}
                }
            }
            let filled = !matches!(m.style.fill, Some(Paint::None));
            if filled {
                let Some(bbox) = m.bbox() else { return };
                for (j, row) in grid.iter_mut().enumerate() {
                    for (i, cell) in row.iter_mut().enumerate() {
                        if *cell {
                            continue;
                        }
                        let c = Point::new(viewport.x + (i as f64 + 0.5) * cw, viewport.y + (j as f64 + 0.5) * ch);
                        if bbox.contains(c) && point_in_rings(c, rings.iter().map(|r| r.as_slice())) {
                            *cell = true;
                        }
                    }
                }
            }
        }
        _ => {
            let Some(b) = m.bbox() else { return };
            for (j, row) in grid.iter_mut().enumerate() {
                for (i, cell) in row.iter_mut().enumerate() {
                    let c = Rect::new(viewport.x + i as f64 * cw, viewport.y + j as f64 * ch, cw, ch);
                    if c.overlaps(&b, 0.0) {
                        *cell = true;
                    }
                }
            }
        }
    }
}

fn sample(from: Option<Point>, to: Point, step: f64) -> Vec<Point> {
    let Some(a) = from else { return vec![to] };
    let n = (a.distance(to) / step).ceil().max(1.0) as usize;
    (1..=n).map(|k| a.lerp(to, k as f64 / n as f64)).collect()
}

/// Largest block of empty cells at least `w` x `h` px, as a pixel rect.
/// Ties go to the block nearest the top, then the left.
pub fn find_empty_block(grid: &[[bool; GRID]; GRID], viewport: Rect, w: f64, h: f64) -> Option<Rect> {
    let (cw, ch) = (viewport.width / GRID as f64, viewport.height / GRID as f64);
    // prefix[j][i] = occupied cells in rows < j, cols < i
    let mut prefix = [[0u32; GRID + 1]; GRID + 1];
    for j in 0..GRID {
        for i in 0..GRID {
            prefix[j + 1][i + 1] = prefix[j][i + 1] + prefix[j + 1][i] - prefix[j][i] + grid[j][i] as u32;
        }
    }
    let mut best: Option<(usize, usize, usize, usize)> = None;
    let area = |b: (usize, usize, usize, usize)| (b.2 - b.0) * (b.3 - b.1);
    for j0 in 0..GRID {
        for i0 in 0..GRID {
            for j1 in j0 + 1..=GRID {
                for i1 in i0 + 1..=GRID {
                    if (i1 - i0) as f64 * cw < w || (j1 - j0) as f64 * ch < h {
                        continue;
                    }
                    let used = prefix[j1][i1] + prefix[j0][i0] - prefix[j0][i1] - prefix[j1][i0];
                    if used > 0 {
                        continue;
                    }
                    let cand = (i0, j0, i1, j1);
                    if best.is_none_or(|b| area(cand) > area(b)) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    best.map(|(i0, j0, i1, j1)| {
        Rect::new(
            viewport.x + i0 as f64 * cw,
            viewport.y + j0 as f64 * ch,
            (i1 - i0) as f64 * cw,
            (j1 - j0) as f64 * ch,
        )
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inset {
    /// Frame, scaled content, then connectors.
    pub marks: Vec<Mark>,
    pub frame: Rect,
    pub scale: f64,
    /// Original content bbox center.
    pub center: Point,
    pub offset: Point,
}

/// Magnified copy of `content` (a region's marks) framed with padding.
/// Adjacent insets go into the largest empty block of `occupied`'s
/// occupancy grid and get two connectors; overlays sit on the original.
pub fn build_inset(
    content: &[Mark],
    scale: f64,
    placement: InsetPlacement,
    occupied: &[Mark],
    viewport: Rect,
) -> Result<Inset, HighlightError> {
    if !(scale > 1.0 && scale <= MAX_INSET_SCALE) {
        return Err(HighlightError::InvalidScale(scale));
    }
    let bbox = content
        .iter()
        .filter_map(Mark::bbox)
        .reduce(|a, b| a.union(&b))
        .ok_or(HighlightError::NoRoom)?;
    let c = bbox.center();
    let (fw, fh) = (scale * bbox.width + 2.0 * INSET_PADDING, scale * bbox.height + 2.0 * INSET_PADDING);
    let offset = match placement {
        InsetPlacement::Overlay => Point::new(0.0, 0.0),
        InsetPlacement::Adjacent => {
            let grid = occupancy(occupied, viewport);
            let block = find_empty_block(&grid, viewport, fw, fh).ok_or(HighlightError::NoRoom)?;
            let target = block.center();
            Point::new(target.x - c.x, target.y - c.y)
        }
    };
    let frame = Rect::centered(Point::new(c.x + offset.x, c.y + offset.y), fw, fh);
    let mut marks = vec![Mark::new(
        MarkTag::Frame,
        Geom::Rect { rect: frame, rx: 4.0 },
        Style::fill(Rgb::WHITE).with_stroke(Rgb::new(0x55, 0x55, 0x55), 1.0),
    )];
    marks.extend(content.iter().map(|m| {
        let mut copy = m.scaled_about(c, scale, offset);
        copy.id = None;
        copy
    }));
    if placement == InsetPlacement::Adjacent {
        let s = offset.x.signum() * offset.y.signum();
        let [tl, tr, br, bl] = bbox.corners();
        let [ftl, ftr, fbr, fbl] = frame.corners();
        let pairs = if s > 0.0 { [(tr, ftr), (bl, fbl)] } else { [(tl, ftl), (br, fbr)] };
        for (a, b) in pairs {
            marks.push(Mark::new(
                MarkTag::Frame,
                Geom::Path(vec![Segment::Move(a), Segment::Line(b)]),
                Style::stroke(Rgb::new(0x55, 0x55, 0x55), 0.75),
            ));
        }
    }
    Ok(Inset {
        marks,
        frame,
        scale,
        center: c,
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(key: &str, x: f64, y: f64, s: f64) -> Shape {
        Shape::from_ring(
            key,
            vec![Point::new(x, y), Point::new(x + s, y), Point::new(x + s, y + s), Point::new(x, y + s)],
        )
    }

    #[test]
    fn glow_radius_is_three_r() {
        let (def, m) = glow("g", Point::new(5.0, 5.0), 4.0, DEFAULT_GLOW_COLOR);
        assert!(matches!(def, Def::RadialGradient { .. }));
        assert_eq!(m.geom, Geom::Circle { center: Point::new(5.0, 5.0), r: 12.0 });
    }

    #[test]
    fn pin_tip() {
        let (_, m) = pin(Point::new(100.0, 50.0), 18.0);
        let Geom::IconRef { origin, size, .. } = m.geom else { panic!() };
        assert_eq!(Point::new(origin.x + size * 12.0 / 24.0, origin.y + size), Point::new(100.0, 50.0));
    }

    #[test]
    fn contrast_formula() {
        let c = contrast_color(Rgb::from_hsl(200.0, 0.5, 0.4));
        let (h, s, l) = c.to_hsl();
        assert!((h - 20.0).abs() < 1.0);
        assert!((s - 0.9).abs() < 0.01 && (l - 0.5).abs() < 0.01);
    }

    #[test]
    fn extrude_original_on_top() {
        let shape = square("a", 0.0, 0.0, 10.0);
        let original = crate::basemap::region_mark(&shape, Rgb::WHITE, Rgb::BLACK, 0.5);
        let g = extrude(&original, &shape, Rgb::new(100, 100, 100));
        let Geom::Group { children, .. } = g.geom else { panic!() };
        assert_eq!(children.len(), 6);
        assert_eq!(children.last().unwrap().geom, original.geom);
        assert_eq!(children[0].style.fill_color(), Some(Rgb::new(60, 60, 60)));
    }

    #[test]
    fn overlay_is_centered() {
        let shape = square("a", 40.0, 40.0, 10.0);
        let content = [crate::basemap::region_mark(&shape, Rgb::WHITE, Rgb::BLACK, 0.5)];
        let inset = build_inset(&content, 2.0, InsetPlacement::Overlay, &[], Rect::new(0.0, 0.0, 160.0, 160.0)).unwrap();
        assert_eq!(inset.frame.center(), Point::new(45.0, 45.0));
        assert_eq!(inset.frame.width, 2.0 * 10.0 + 2.0 * INSET_PADDING);
        assert_eq!(inset.marks.len(), 2);
    }

    #[test]
    fn adjacent_avoids_ink_or_fails() {
        let view = Rect::new(0.0, 0.0, 160.0, 160.0);
        let shape = square("a", 0.0, 0.0, 10.0);
        let content = [crate::basemap::region_mark(&shape, Rgb::WHITE, Rgb::BLACK, 0.5)];
        let inset = build_inset(&content, 2.0, InsetPlacement::Adjacent, &content, view).unwrap();
        assert!(!inset.frame.overlaps(&Rect::new(0.0, 0.0, 10.0, 10.0), 0.0));
        assert_eq!(inset.marks.len(), 4);
        let full = [crate::basemap::region_mark(&square("all", 0.0, 0.0, 160.0), Rgb::WHITE, Rgb::BLACK, 0.5)];
        assert_eq!(
            build_inset(&content, 2.0, InsetPlacement::Adjacent, &full, view),
            Err(HighlightError::NoRoom)
        );
    }

    #[test]
    fn block_prefers_top_left_on_ties() {
        let mut grid = [[true; GRID]; GRID];
        grid[3][2] = false;
        grid[10][1] = false;
        let b = find_empty_block(&grid, Rect::new(0.0, 0.0, 160.0, 160.0), 5.0, 5.0).unwrap();
        assert_eq!(b, Rect::new(20.0, 30.0, 10.0, 10.0));
    }
}
