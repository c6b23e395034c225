use std::collections::BTreeMap;

use crate::dataio::FlowEdge;
use crate::designspace::{ChannelKind, ChannelSpec};
use crate::geodata::Point;
use crate::scales::map_or_midpoint;
use crate::scene::{Geom, Mark, MarkTag, Segment, Style};

use super::{format_number, EncodeError, EncodedLayer, Footprint, LegendEntry, Swatch, DEFAULT_MARK_COLOR};

/// Bow of a flow curve relative to its chord length.
const BOW: f64 = 0.2;

/// Quadratic control point: the chord midpoint pushed sideways by a fifth
/// of the chord, to the left of travel on screen.
pub fn control_point(from: Point, to: Point) -> Point {
    let mid = from.lerp(to, 0.5);
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return mid;
    }
    Point::new(mid.x + dy / len * BOW * len, mid.y - dx / len * BOW * len)
}

fn quad_at(p0: Point, c: Point, p1: Point, t: f64) -> Point {
    let u = 1.0 - t;
    Point::new(
        u * u * p0.x + 2.0 * u * t * c.x + t * t * p1.x,
        u * u * p0.y + 2.0 * u * t * c.y + t * t * p1.y,
    )
}

/// Point halfway along the curve parameter.
pub fn flow_midpoint(from: Point, to: Point) -> Point {
    quad_at(from, control_point(from, to), to, 0.5)
}

fn arrowhead(tip: Point, toward: Point, width: f64) -> (Vec<Segment>, f64) {
    let (dx, dy) = (tip.x - toward.x, tip.y - toward.y);
    let len = (dx * dx + dy * dy).sqrt().max(1e-9);
    let (ux, uy) = (dx / len, dy / len);
    let (l, hw) = (4.0 + 2.0 * width, 2.0 + width);
    let base = Point::new(tip.x - ux * l, tip.y - uy * l);
    (
        vec![
            Segment::Move(tip),
            Segment::Line(Point::new(base.x - uy * hw, base.y + ux * hw)),
            Segment::Line(Point::new(base.x + uy * hw, base.y - ux * hw)),
            Segment::Close,
        ],
        l,
    )
}

/// One curve per edge, stroke width linear in magnitude over
/// [1, `max_width`]. Directional flows end in an arrowhead and the curve
/// stops at its base.
pub fn encode_flow(
    edges: &[FlowEdge],
    anchors: &BTreeMap<String, Point>,
    directional: bool,
    spec: &ChannelSpec,
) -> Result<EncodedLayer, EncodeError> {
    let kind = if directional {
        ChannelKind::DirectionalFlow
    } else {
        ChannelKind::NonDirectionalFlow
    };
    let color = spec.color.unwrap_or(DEFAULT_MARK_COLOR);
    let max_w = spec.max_width();
    let max = edges.iter().map(|e| e.magnitude).fold(0.0, f64::max);
    let mut sorted: Vec<&FlowEdge> = edges.iter().collect();
    sorted.sort_by_key(|e| e.key());
    let mut layer = EncodedLayer::new(kind);
    for e in sorted {
        let from = *anchors
            .get(&e.from)
            .ok_or_else(|| EncodeError::UnresolvedEndpoint(e.from.clone()))?;
        let to = *anchors.get(&e.to).ok_or_else(|| EncodeError::UnresolvedEndpoint(e.to.clone()))?;
        let ctrl = control_point(from, to);
        let w = map_or_midpoint(e.magnitude, [0.0, max], [1.0, max_w]);
        let key = e.key();
        let mut end = (ctrl, to);
        let mut arrow = None;
        if directional {
            let (path, l) = arrowhead(to, ctrl, w);
            let chord = from.distance(to).max(1e-9);
            let t = (1.0 - l / chord).clamp(0.5, 1.0);
            // Split the curve at t: the left piece has control lerp(from, ctrl, t).
            end = (from.lerp(ctrl, t), quad_at(from, ctrl, to, t));
            arrow = Some(path);
        }
        layer.flow_marks.push(
            Mark::new(
                MarkTag::Flow,
                Geom::Path(vec![Segment::Move(from), Segment::Quad(end.0, end.1)]),
                Style::stroke(color, w).with_opacity(0.85),
            )
            .keyed(key.clone()),
        );
        if let Some(path) = arrow {
            layer.flow_marks.push(
                Mark::new(MarkTag::Arrow, Geom::Path(path), Style::fill(color).with_opacity(0.85)).keyed(key.clone()),
            );
        }
        layer.footprints.insert(
            key,
            Footprint {
                anchor: quad_at(from, ctrl, to, 0.5),
                above: w / 2.0,
                below: w / 2.0,
            },
        );
    }
    if max > 0.0 {
        layer.legend.push(LegendEntry::new(
            Swatch::Line {
                width: max_w,
                color,
                arrow: directional,
            },
            format_number(max),
        ));
        layer.legend.push(LegendEntry::new(
            Swatch::Line {
                width: 1.0,
                color,
                arrow: directional,
            },
            "0",
        ));
    }
    Ok(layer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(from: &str, to: &str, m: f64) -> FlowEdge {
        FlowEdge {
            from: from.into(),
            to: to.into(),
            magnitude: m,
            label: None,
        }
    }

    fn anchors() -> BTreeMap<String, Point> {
        [("a", Point::new(0.0, 100.0)), ("b", Point::new(100.0, 100.0)), ("c", Point::new(50.0, 0.0))]
            .into_iter()
            .map(|(k, p)| (k.to_string(), p))
            .collect()
    }

    #[test]
    fn control_bows_left_of_travel() {
        let c = control_point(Point::new(0.0, 100.0), Point::new(100.0, 100.0));
        assert_eq!(c, Point::new(50.0, 80.0));
    }

    #[test]
    fn widths_and_arrows() {
        let edges = [edge("a", "b", 10.0), edge("b", "c", 5.0)];
        let l = encode_flow(&edges, &anchors(), true, &ChannelSpec::new(ChannelKind::DirectionalFlow)).unwrap();
        assert_eq!(l.flow_marks.len(), 4);
        assert_eq!(l.flow_marks[0].style.stroke_width, Some(6.0));
        assert_eq!(l.flow_marks[2].style.stroke_width, Some(3.5));
        assert_eq!(l.flow_marks[1].tag, MarkTag::Arrow);
        let Geom::Path(segs) = &l.flow_marks[1].geom else { panic!() };
        assert_eq!(segs[0], Segment::Move(Point::new(100.0, 100.0)));
    }

    #[test]
    fn undirected_has_no_arrows() {
        let edges = [edge("a", "b", 10.0)];
        let l = encode_flow(&edges, &anchors(), false, &ChannelSpec::new(ChannelKind::NonDirectionalFlow)).unwrap();
        assert!(l.flow_marks.iter().all(|m| m.tag == MarkTag::Flow));
    }

    #[test]
    fn missing_endpoint() {
        let edges = [edge("a", "zz", 1.0)];
        assert_eq!(
            encode_flow(&edges, &anchors(), true, &ChannelSpec::new(ChannelKind::DirectionalFlow)),
            Err(EncodeError::UnresolvedEndpoint("zz".into()))
        );
    }
}
