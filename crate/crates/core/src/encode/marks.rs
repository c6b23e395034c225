use std::collections::BTreeMap;

use crate::color::Rgb;
use crate::designspace::{series_key, ChannelKind, ChannelSpec, GlyphDescriptor, MAX_ICONS};
use crate::geodata::{Point, Rect};
use crate::icons;
use crate::scales::{map_or_midpoint, nice_ceil, symbol_radius, DEFAULT_CATEGORICAL};
use crate::scene::{Geom, Mark, MarkTag, Segment, Style, TextAnchor};

use super::{
    format_number, require_values, Datum, EncodeError, EncodedLayer, Footprint, LegendEntry, Swatch,
    DEFAULT_MARK_COLOR,
};

pub const TEXT_FILL: Rgb = Rgb::new(0x33, 0x33, 0x33);
/// Overlap allowed at convergence, as a fraction of the smaller radius.
pub const DORLING_TOLERANCE: f64 = 0.005;
pub const DORLING_MAX_PASSES: usize = 512;

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

fn footprint(anchor: Point, above: f64, below: f64) -> Footprint {
    Footprint { anchor, above, below }
}

fn polygon(points: &[Point]) -> Geom {
    let mut segs = vec![Segment::Move(points[0])];
    segs.extend(points[1..].iter().map(|p| Segment::Line(*p)));
    segs.push(Segment::Close);
    Geom::Path(segs)
}

/// Bars rising from each anchor, height linear in value over [0, max].
pub fn encode_length2d(data: &[Datum], spec: &ChannelSpec) -> Result<EncodedLayer, EncodeError> {
    let values = require_values(data, ChannelKind::Length2D)?;
    let (w, max_h) = (spec.bar_width(), spec.max_height());
    let fill = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
    let max = max_of(&values);
    let mut layer = EncodedLayer::new(ChannelKind::Length2D);
    for (d, v) in data.iter().zip(&values) {
        if *v <= 0.0 {
            continue;
        }
        let h = map_or_midpoint(*v, [0.0, max], [0.0, max_h]);
        let rect = Rect::new(d.anchor.x - w / 2.0, d.anchor.y - h, w, h);
        layer
            .marks
            .push(Mark::new(MarkTag::Bar, Geom::Rect { rect, rx: 0.0 }, Style::fill(fill)).keyed(d.key.clone()));
        layer.footprints.insert(d.key.clone(), footprint(d.anchor, h, 0.0));
    }
    if max > 0.0 {
        layer.legend.push(LegendEntry::new(
            Swatch::Bar {
                width: w,
                height: max_h,
                fill,
            },
            format_number(max),
        ));
    }
    Ok(layer)
}

/// Oblique prisms: a front face, a top and a right side receding up-right by
/// half the bar width. Back prisms (smaller y) are drawn first.
pub fn encode_length3d(data: &[Datum], spec: &ChannelSpec) -> Result<EncodedLayer, EncodeError> {
    let values = require_values(data, ChannelKind::Length3D)?;
    let (w, max_h) = (spec.bar_width(), spec.max_height());
    let depth = 0.5 * w;
    let c = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
    let max = max_of(&values);
    let mut items: Vec<(&Datum, f64)> = data.iter().zip(values.iter().copied()).filter(|(_, v)| *v > 0.0).collect();
    items.sort_by(|a, b| a.0.anchor.y.total_cmp(&b.0.anchor.y).then_with(|| a.0.key.cmp(&b.0.key)));
    let mut layer = EncodedLayer::new(ChannelKind::Length3D);
    for (d, v) in items {
        let h = map_or_midpoint(v, [0.0, max], [0.0, max_h]);
        let (x0, y0) = (d.anchor.x - w / 2.0, d.anchor.y);
        let p = Point::new;
        let side = [p(x0 + w, y0), p(x0 + w + depth, y0 - depth), p(x0 + w + depth, y0 - h - depth), p(x0 + w, y0 - h)];
        let front = [p(x0, y0), p(x0 + w, y0), p(x0 + w, y0 - h), p(x0, y0 - h)];
        let top = [p(x0, y0 - h), p(x0 + w, y0 - h), p(x0 + w + depth, y0 - h - depth), p(x0 + depth, y0 - h - depth)];
        for (tag, pts, fill) in [
            (MarkTag::PrismSide, side, c.darken(0.75)),
            (MarkTag::PrismFront, front, c.darken(0.6)),
            (MarkTag::PrismTop, top, c),
        ] {
            layer
                .marks
                .push(Mark::new(tag, polygon(&pts), Style::fill(fill)).keyed(d.key.clone()));
        }
        layer.footprints.insert(d.key.clone(), footprint(d.anchor, h + depth, 0.0));
    }
    if max > 0.0 {
        layer.legend.push(LegendEntry::new(
            Swatch::Bar {
                width: w,
                height: max_h,
                fill: c,
            },
            format_number(max),
        ));
    }
    Ok(layer)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DorlingCircle {
    pub key: String,
    pub center: Point,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DorlingResult {
    pub circles: Vec<DorlingCircle>,
    pub converged: bool,
    pub passes: usize,
}

/// Largest pairwise overlap divided by the smaller radius; 0 when disjoint.
pub fn max_overlap_ratio(circles: &[DorlingCircle]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in circles.iter().enumerate() {
        for b in &circles[i + 1..] {
            let small = a.r.min(b.r);
            if small <= 0.0 {
                continue;
            }
            let overlap = a.r + b.r - a.center.distance(b.center);
            worst = worst.max(overlap / small);
        }
    }
    worst
}

/// Pushes overlapping circles apart pair by pair (Gauss-Seidel, key order),
/// each moving in inverse proportion to its area. Coincident centers split
/// along +x, the larger key moving right.
pub fn dorling_relax(mut circles: Vec<DorlingCircle>) -> DorlingResult {
    circles.sort_by(|a, b| a.key.cmp(&b.key));
    let n = circles.len();
    let mut passes = 0;
    while passes < DORLING_MAX_PASSES {
        if max_overlap_ratio(&circles) <= DORLING_TOLERANCE {
            return DorlingResult {
                circles,
                converged: true,
                passes,
            };
        }
        passes += 1;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&circles[i], &circles[j]);
                if a.r <= 0.0 || b.r <= 0.0 {
                    continue;
                }
                let dx = b.center.x - a.center.x;
                let dy = b.center.y - a.center.y;
                let d = (dx * dx + dy * dy).sqrt();
                let overlap = a.r + b.r - d;
                if overlap <= 0.0 {
                    continue;
                }
                let (ux, uy) = if d < 1e-9 { (1.0, 0.0) } else { (dx / d, dy / d) };
                let (wa, wb) = (a.r * a.r, b.r * b.r);
                let move_a = overlap * wb / (wa + wb);
                let move_b = overlap * wa / (wa + wb);
                circles[i].center = circles[i].center.offset(-ux * move_a, -uy * move_a);
                circles[j].center = circles[j].center.offset(ux * move_b, uy * move_b);
            }
        }
    }
    let converged = max_overlap_ratio(&circles) <= DORLING_TOLERANCE;
    DorlingResult {
        circles,
        converged,
        passes,
    }
}

/// Area-proportional circles; with `cartogram` they are displaced until no
/// two overlap.
pub fn encode_size(data: &[Datum], spec: &ChannelSpec) -> Result<EncodedLayer, EncodeError> {
    let values = require_values(data, ChannelKind::Size)?;
    let r_max = spec.max_radius();
    let fill = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
    let max = max_of(&values);
    let mut circles: Vec<DorlingCircle> = data
        .iter()
        .zip(&values)
        .map(|(d, v)| DorlingCircle {
            key: d.key.clone(),
            center: d.anchor,
            r: symbol_radius(*v, max, r_max),
        })
        .filter(|c| c.r > 0.0)
        .collect();
    let mut layer = EncodedLayer::new(ChannelKind::Size);
    if spec.cartogram {
        let relaxed = dorling_relax(circles);
        if !relaxed.converged {
            layer.notes.push(format!(
                "cartogram still overlaps after {} passes",
                relaxed.passes
            ));
        }
        circles = relaxed.circles;
    }
    for c in circles {
        layer.marks.push(
            Mark::new(
                MarkTag::Symbol,
                Geom::Circle { center: c.center, r: c.r },
                Style::fill(fill).with_stroke(Rgb::WHITE, 0.5).with_opacity(0.85),
            )
            .keyed(c.key.clone()),
        );
        layer.footprints.insert(c.key, footprint(c.center, c.r, c.r));
    }
    if max > 0.0 {
        layer.legend.push(LegendEntry::new(Swatch::Circle { r: r_max, fill }, format_number(max)));
        layer
            .legend
            .push(LegendEntry::new(Swatch::Circle { r: r_max / 2.0, fill }, format_number(max / 4.0)));
    }
    Ok(layer)
}

/// Icons per region, one per `unit`, in rows of `per_row` centred on the
/// anchor.
pub fn encode_quantity(data: &[Datum], spec: &ChannelSpec) -> Result<EncodedLayer, EncodeError> {
    let values = require_values(data, ChannelKind::Quantity)?;
    let name = spec.icon();
    let def = icons::symbol(name, None).ok_or_else(|| EncodeError::UnknownIcon(name.to_string()))?;
    let unit = spec.unit.unwrap_or_else(|| nice_ceil(max_of(&values) / 20.0));
    let (s, k) = (spec.icon_size(), spec.per_row().max(1));
    let fill = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
    let def_id = def.id().to_string();
    let mut layer = EncodedLayer::new(ChannelKind::Quantity);
    let mut below_unit = Vec::new();
    for (d, v) in data.iter().zip(&values) {
        let n = (v / unit).round().max(0.0) as usize;
        if n > MAX_ICONS {
            return Err(EncodeError::TooManyIcons {
                key: d.key.clone(),
                count: n,
            });
        }
        if n == 0 {
            if *v > 0.0 {
                below_unit.push(d.name.clone());
            }
            continue;
        }
        let cols = n.min(k);
        let rows = n.div_ceil(k);
        let (bw, bh) = (cols as f64 * s, rows as f64 * s);
        let (x0, y0) = (d.anchor.x - bw / 2.0, d.anchor.y - bh / 2.0);
        for i in 0..n {
            let origin = Point::new(x0 + (i % k) as f64 * s, y0 + (i / k) as f64 * s);
            layer.marks.push(
                Mark::new(
                    MarkTag::Icon,
                    Geom::IconRef {
                        def: def_id.clone(),
                        origin,
                        size: s,
                    },
                    Style::fill(fill),
                )
                .keyed(d.key.clone()),
            );
        }
        layer.footprints.insert(d.key.clone(), footprint(d.anchor, bh / 2.0, bh / 2.0));
    }
    layer.defs.push(def);
    layer.legend.push(LegendEntry::new(
        Swatch::Icon { def: def_id, fill },
        format!("1 icon = {}", format_number(unit)),
    ));
    if !below_unit.is_empty() {
        let note = format!("below unit: {}", below_unit.join(", "));
        layer.legend.push(LegendEntry::new(Swatch::None, note.clone()));
        layer.notes.push(note);
    }
    Ok(layer)
}

/// Region key to series values, resolving names through the alias table.
fn series_by_key(
    series: &BTreeMap<String, Vec<f64>>,
    aliases: &BTreeMap<String, String>,
) -> BTreeMap<String, Vec<f64>> {
    series
        .iter()
        .map(|(name, values)| (series_key(name, aliases), values.clone()))
        .collect()
}

fn series_color(palette: &Option<Vec<Rgb>>, i: usize) -> Rgb {
    match palette {
        Some(p) if !p.is_empty() => p[i % p.len()],
        _ => DEFAULT_CATEGORICAL[i % DEFAULT_CATEGORICAL.len()],
    }
}

fn pie_sectors(center: Point, r: f64, values: &[f64], palette: &Option<Vec<Rgb>>) -> Vec<Mark> {
    let total: f64 = values.iter().filter(|v| **v > 0.0).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = -std::f64::consts::FRAC_PI_2;
    for (i, v) in values.iter().enumerate() {
        if *v <= 0.0 {
            continue;
        }
        let fill = series_color(palette, i);
        if *v >= total {
            out.push(Mark::new(MarkTag::Glyph, Geom::Circle { center, r }, Style::fill(fill)));
            break;
        }
        let sweep = std::f64::consts::TAU * v / total;
        let end = start + sweep;
        let at = |a: f64| Point::new(center.x + r * a.cos(), center.y + r * a.sin());
        out.push(Mark::new(
            MarkTag::Glyph,
            Geom::Path(vec![
                Segment::Move(center),
                Segment::Line(at(start)),
                Segment::Arc {
                    r,
                    large: sweep > std::f64::consts::PI,
                    sweep: true,
                    to: at(end),
                },
                Segment::Close,
            ]),
            Style::fill(fill),
        ));
        start = end;
    }
    out
}

/// One glyph per region in a square box centred on the anchor: an icon, a
/// mini bar chart scaled to its own maximum, or a pie starting at twelve
/// o'clock and running clockwise.
pub fn encode_glyph(
    data: &[Datum],
    spec: &ChannelSpec,
    aliases: &BTreeMap<String, String>,
) -> Result<EncodedLayer, EncodeError> {
    let s = spec.icon_size();
    let mut layer = EncodedLayer::new(ChannelKind::Glyph);
    let group = |key: &str, children: Vec<Mark>| {
        Mark::new(
            MarkTag::Glyph,
            Geom::Group {
                children,
                transform: None,
            },
            Style::default(),
        )
        .keyed(key)
    };
    match spec.glyph() {
        GlyphDescriptor::Icon { name, path } => {
            let def = icons::symbol(&name, path.as_deref()).ok_or_else(|| EncodeError::UnknownIcon(name.clone()))?;
            let fill = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
            for d in data {
                let icon = Mark::new(
                    MarkTag::Icon,
                    Geom::IconRef {
                        def: def.id().to_string(),
                        origin: d.anchor.offset(-s / 2.0, -s / 2.0),
                        size: s,
                    },
                    Style::fill(fill),
                )
                .keyed(d.key.clone());
                layer.marks.push(group(&d.key, vec![icon]));
                layer.footprints.insert(d.key.clone(), footprint(d.anchor, s / 2.0, s / 2.0));
            }
            layer.legend.push(LegendEntry::new(
                Swatch::Icon {
                    def: def.id().to_string(),
                    fill,
                },
                name,
            ));
            layer.defs.push(def);
        }
        GlyphDescriptor::Bar { series, palette } | GlyphDescriptor::Pie { series, palette } => {
            if series.is_empty() {
                return Err(EncodeError::MissingSeries);
            }
            let is_pie = matches!(spec.glyph(), GlyphDescriptor::Pie { .. });
            let by_key = series_by_key(&series, aliases);
            let mut longest = 0;
            for d in data {
                let Some(values) = by_key.get(&d.key) else { continue };
                longest = longest.max(values.len());
                let children = if is_pie {
                    pie_sectors(d.anchor, s / 2.0, values, &palette)
                } else {
                    let max = max_of(values);
                    let bw = s / values.len().max(1) as f64;
                    let (x0, bottom) = (d.anchor.x - s / 2.0, d.anchor.y + s / 2.0);
                    values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| {
                            let h = if max > 0.0 { s * v.max(0.0) / max } else { 0.0 };
                            Mark::new(
                                MarkTag::Glyph,
                                Geom::Rect {
                                    rect: Rect::new(x0 + i as f64 * bw, bottom - h, bw, h),
                                    rx: 0.0,
                                },
                                Style::fill(series_color(&palette, i)),
                            )
                        })
                        .collect()
                };
                let children = children.into_iter().map(|m| m.keyed(d.key.clone())).collect();
                layer.marks.push(group(&d.key, children));
                layer.footprints.insert(d.key.clone(), footprint(d.anchor, s / 2.0, s / 2.0));
            }
            for i in 0..longest {
                layer.legend.push(LegendEntry::new(
                    Swatch::Fill(series_color(&palette, i)),
                    format!("series {}", i + 1),
                ));
            }
        }
    }
    Ok(layer)
}

/// Rescales each glyph so its box matches an area-proportional circle.
pub(crate) fn resize_glyphs(
    mut layer: EncodedLayer,
    size: &ChannelSpec,
    data: &[Datum],
) -> Result<EncodedLayer, EncodeError> {
    let values = require_values(data, ChannelKind::Size)?;
    let max = max_of(&values);
    let r_max = size.max_radius();
    let radius: BTreeMap<&str, (Point, f64)> = data
        .iter()
        .zip(&values)
        .map(|(d, v)| (d.key.as_str(), (d.anchor, symbol_radius(*v, max, r_max))))
        .collect();
    let box_size = layer
        .footprints
        .values()
        .next()
        .map_or(icons::ICON_BOX, |f| f.above + f.below);
    let mut marks = Vec::new();
    for mark in layer.marks {
        let Some((anchor, r)) = mark.key.as_deref().and_then(|k| radius.get(k)).copied() else {
            marks.push(mark);
            continue;
        };
        if r <= 0.0 {
            continue;
        }
        marks.push(mark.scaled_about(anchor, 2.0 * r / box_size, Point::new(0.0, 0.0)));
    }
    layer.marks = marks;
    layer.footprints.retain(|k, _| radius.get(k.as_str()).is_some_and(|(_, r)| *r > 0.0));
    for (k, f) in layer.footprints.iter_mut() {
        let r = radius[k.as_str()].1;
        f.above = r;
        f.below = r;
    }
    if max > 0.0 {
        let grey = Rgb::new(0x99, 0x99, 0x99);
        layer.legend.push(LegendEntry::new(Swatch::Circle { r: r_max, fill: grey }, format_number(max)));
        layer.legend.push(LegendEntry::new(
            Swatch::Circle {
                r: r_max / 2.0,
                fill: grey,
            },
            format_number(max / 4.0),
        ));
    }
    Ok(layer)
}

/// Formatted value (or category) centred on each anchor.
pub fn encode_text(data: &[Datum], spec: &ChannelSpec) -> EncodedLayer {
    let fs = spec.font_size();
    let fill = spec.color.unwrap_or(TEXT_FILL);
    let mut layer = EncodedLayer::new(ChannelKind::Text);
    for d in data {
        let Some(text) = d.value.map(format_number).or_else(|| d.category.clone()) else { continue };
        layer.marks.push(
            Mark::new(
                MarkTag::Text,
                Geom::Text {
                    origin: d.anchor.offset(0.0, 0.35 * fs),
                    lines: vec![text],
                    font_size: fs,
                    anchor: TextAnchor::Middle,
                },
                Style::fill(fill),
            )
            .keyed(d.key.clone()),
        );
        layer.footprints.insert(d.key.clone(), footprint(d.anchor, 0.65 * fs, 0.55 * fs));
    }
    layer
}
