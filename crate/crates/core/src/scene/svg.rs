//! Byte-deterministic SVG 1.1 serialization.
//!
//! Attributes are written in byte order of their names, numbers with exactly
//! two decimals (half away from zero on the shortest decimal form), colors as
//! lowercase `#rrggbb`.

use std::fmt::Write;

use super::{Def, Geom, GradientStop, Mark, Paint, SceneGraph, Segment, TextAnchor};
use crate::geodata::Point;

const SVG_NS: &str = "http://www.w3.org/2000/svg";
const XLINK_NS: &str = "http://www.w3.org/1999/xlink";
const FONT_FAMILY: &str = "sans-serif";

/// Formats a number with exactly two decimals, rounding half away from zero
/// on its shortest round-trip decimal representation (so `1.005` gives
/// `"1.01"`).
pub fn format_coord(x: f64) -> String {
    if !x.is_finite() {
        return "0.00".to_string();
    }
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.push(frac.first().copied().unwrap_or(0));
    digits.push(frac.get(1).copied().unwrap_or(0));
    if frac.get(2).copied().unwrap_or(0) >= 5 {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let mut out = String::with_capacity(digits.len() + 2);
    if x < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    for d in &digits[..split] {
        out.push((b'0' + d) as char);
    }
    out.push('.');
    for d in &digits[split..] {
        out.push((b'0' + d) as char);
    }
    out
}

/// Viewport dimension: integral values without decimals.
fn format_dim(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format_coord(x)
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
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' && c != '\r' => {}
            c => out.push(c),
        }
    }
    out
}

struct Element {
    name: &'static str,
    attrs: Vec<(&'static str, String)>,
}

impl Element {
    fn new(name: &'static str) -> Self {
        Self { name, attrs: Vec::new() }
    }

    fn attr(mut self, key: &'static str, value: impl Into<String>) -> Self {
        self.attrs.push((key, value.into()));
        self
    }

    fn num(self, key: &'static str, value: f64) -> Self {
        self.attr(key, format_coord(value))
    }

    fn open_tag(&mut self, out: &mut String, self_closing: bool) {
        self.attrs.sort_by(|a, b| a.0.cmp(b.0));
        out.push('<');
        out.push_str(self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {}=\"{}\"", k, escape(v));
        }
        out.push_str(if self_closing { "/>" } else { ">" });
    }
}

fn paint(p: &Paint) -> String {
    match p {
        Paint::None => "none".to_string(),
        Paint::Color(c) => c.to_hex(),
        Paint::Ref(id) => format!("url(#{id})"),
    }
}

fn path_data(segs: &[Segment]) -> String {
    let pt = |p: &Point| format!("{} {}", format_coord(p.x), format_coord(p.y));
    let mut d = String::new();
    for seg in segs {
        match seg {
            Segment::Move(p) => {
                let _ = write!(d, "M{}", pt(p));
            }
            Segment::Line(p) => {
                let _ = write!(d, "L{}", pt(p));
            }
            Segment::Quad(c, p) => {
                let _ = write!(d, "Q{} {}", pt(c), pt(p));
            }
            Segment::Arc { r, large, sweep, to } => {
                let _ = write!(
                    d,
                    "A{} {} 0 {} {} {}",
                    format_coord(*r),
                    format_coord(*r),
                    u8::from(*large),
                    u8::from(*sweep),
                    pt(to)
                );
            }
            Segment::Close => d.push('Z'),
        }
    }
    d
}

fn styled(mut el: Element, mark: &Mark) -> Element {
    if let Some(id) = &mark.id {
        el = el.attr("id", id.clone());
    }
    let s = &mark.style;
    if let Some(fill) = &s.fill {
        el = el.attr("fill", paint(fill));
    }
    if let Some(stroke) = s.stroke {
        el = el.attr("stroke", stroke.to_hex());
    }
    if let Some(w) = s.stroke_width {
        el = el.num("stroke-width", w);
    }
    if let Some(o) = s.opacity {
        el = el.num("opacity", o);
    }
    el
}

fn write_mark(out: &mut String, mark: &Mark) {
    match &mark.geom {
        Geom::Path(segs) => {
            styled(Element::new("path"), mark).attr("d", path_data(segs)).open_tag(out, true);
        }
        Geom::Rect { rect, rx } => {
            let mut el = styled(Element::new("rect"), mark)
                .num("x", rect.x)
                .num("y", rect.y)
                .num("width", rect.width)
                .num("height", rect.height);
            if *rx > 0.0 {
                el = el.num("rx", *rx);
            }
            el.open_tag(out, true);
        }
        Geom::Circle { center, r } => {
            styled(Element::new("circle"), mark)
                .num("cx", center.x)
                .num("cy", center.y)
                .num("r", *r)
                .open_tag(out, true);
        }
        Geom::Text {
            origin,
            lines,
            font_size,
            anchor,
        } => {
            let anchor = match anchor {
                TextAnchor::Start => "start",
                TextAnchor::Middle => "middle",
                TextAnchor::End => "end",
            };
            let mut el = styled(Element::new("text"), mark)
                .num("x", origin.x)
                .num("y", origin.y)
                .num("font-size", *font_size)
                .attr("font-family", FONT_FAMILY)
                .attr("text-anchor", anchor);
            el.open_tag(out, false);
            for (i, line) in lines.iter().enumerate() {
                if i == 0 && lines.len() == 1 {
                    out.push_str(&escape(line));
                    continue;
                }
                let dy = if i == 0 { 0.0 } else { 1.2 * font_size };
                Element::new("tspan")
                    .num("x", origin.x)
                    .num("dy", dy)
                    .open_tag(out, false);
                out.push_str(&escape(line));
                out.push_str("</tspan>");
            }
            out.push_str("</text>");
        }
        Geom::Group { children, transform } => {
            let mut el = styled(Element::new("g"), mark);
            if let Some(t) = transform {
                el = el.attr(
                    "transform",
                    format!(
                        "translate({} {}) scale({})",
                        format_coord(t.tx),
                        format_coord(t.ty),
                        format_coord(t.scale)
                    ),
                );
            }
            el.open_tag(out, children.is_empty());
            if !children.is_empty() {
                for child in children {
                    write_mark(out, child);
                }
                out.push_str("</g>");
            }
        }
        Geom::IconRef { def, origin, size } => {
            styled(Element::new("use"), mark)
                .num("x", origin.x)
                .num("y", origin.y)
                .num("width", *size)
                .num("height", *size)
                .attr("xlink:href", format!("#{def}"))
                .open_tag(out, true);
        }
    }
}

fn write_stops(out: &mut String, stops: &[GradientStop]) {
    for stop in stops {
        Element::new("stop")
            .num("offset", stop.offset)
            .attr("stop-color", stop.color.to_hex())
            .num("stop-opacity", stop.opacity)
            .open_tag(out, true);
    }
}

fn write_def(out: &mut String, def: &Def) {
    match def {
        Def::Symbol { id, size, path } => {
            Element::new("symbol")
                .attr("id", id.clone())
                .attr("viewBox", format!("0 0 {} {}", format_dim(*size), format_dim(*size)))
                .open_tag(out, false);
            Element::new("path").attr("d", path.clone()).open_tag(out, true);
            out.push_str("</symbol>");
        }
        Def::LinearGradient { id, stops } => {
            Element::new("linearGradient")
                .attr("id", id.clone())
                .attr("x1", "0")
                .attr("x2", "1")
                .attr("y1", "0")
                .attr("y2", "0")
                .open_tag(out, false);
            write_stops(out, stops);
            out.push_str("</linearGradient>");
        }
        Def::RadialGradient { id, stops } => {
            Element::new("radialGradient")
                .attr("id", id.clone())
                .attr("cx", "0.5")
                .attr("cy", "0.5")
                .attr("r", "0.5")
                .open_tag(out, false);
            write_stops(out, stops);
            out.push_str("</radialGradient>");
        }
    }
}

/// Serializes the scene as a standalone SVG document. Empty layers are
/// omitted; non-empty ones become `<g id="layer-…">` in fixed order.
pub fn to_svg(scene: &SceneGraph) -> String {
    let mut out = String::new();
    let mut root = Element::new("svg")
        .attr("width", format_dim(scene.width))
        .attr("height", format_dim(scene.height))
        .attr(
            "viewBox",
            format!("0 0 {} {}", format_dim(scene.width), format_dim(scene.height)),
        )
        .attr("xmlns", SVG_NS);
    let uses_xlink = scene.layers.iter().any(|(_, marks)| marks.iter().any(has_icon_ref));
    if uses_xlink {
        root = root.attr("xmlns:xlink", XLINK_NS);
    }
    let empty = scene.defs.is_empty() && scene.layers.iter().all(|(_, m)| m.is_empty());
    root.open_tag(&mut out, empty);
    if empty {
        out.push('\n');
        return out;
    }
    out.push('\n');
    if !scene.defs.is_empty() {
        out.push_str("<defs>");
        for def in &scene.defs {
            write_def(&mut out, def);
        }
        out.push_str("</defs>\n");
    }
    for (kind, marks) in &scene.layers {
        if marks.is_empty() {
            continue;
        }
        Element::new("g")
            .attr("id", format!("layer-{}", kind.prefix()))
            .open_tag(&mut out, false);
        out.push('\n');
        for mark in marks {
            write_mark(&mut out, mark);
            out.push('\n');
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

fn has_icon_ref(mark: &Mark) -> bool {
    match &mark.geom {
        Geom::IconRef { .. } => true,
        Geom::Group { children, .. } => children.iter().any(has_icon_ref),
        _ => false,
    }
}
