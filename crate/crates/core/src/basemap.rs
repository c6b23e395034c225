//! Bottom layer: nothing, political outlines, or dot-grid silhouettes.
//!
//! Varied dot radii come from a fixed generator: splitmix64 chained over
//! `(seed, fnv1a64(region key), i, j)`, top 53 bits mapped to `u` in [0, 1),
//! radius `r * (0.5 + u)`.

use thiserror::Error;

use crate::color::Rgb;
use crate::designspace::{BaseMapKind, BaseMapSpec};
use crate::geodata::{Point, Shape};
use crate::scene::{rings_path, Geom, Mark, MarkTag, Style};

pub const POLITICAL_FILL: Rgb = Rgb::new(0xe8, 0xe8, 0xe8);
pub const POLITICAL_STROKE: Rgb = Rgb::new(0xff, 0xff, 0xff);
pub const DOT_FILL: Rgb = Rgb::new(0xc8, 0xc8, 0xc8);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaseMapError {
    #[error("{0:?} base maps are not supported")]
    UnsupportedBaseMap(BaseMapKind),
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic value in [0, 1) for lattice cell `(i, j)` of `key`.
pub fn dot_jitter(seed: u64, key: &str, i: u64, j: u64) -> f64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ fnv1a64(key.as_bytes()));
    h = splitmix64(h ^ i);
    h = splitmix64(h ^ j);
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Lattice cells `(i, j, center)` of the shape's bbox whose centers lie in
/// the shape. Centers sit at `origin + spacing/2 + k * spacing`.
pub fn lattice(shape: &Shape, spacing: f64) -> Vec<(u64, u64, Point)> {
    let bbox = shape.bounding_box();
    if spacing.is_nan() || spacing <= 0.0 || shape.area() <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut j = 0u64;
    loop {
        let y = bbox.y + spacing / 2.0 + j as f64 * spacing;
        if y >= bbox.bottom() {
            break;
        }
        let mut i = 0u64;
        loop {
            let x = bbox.x + spacing / 2.0 + i as f64 * spacing;
            if x >= bbox.right() {
                break;
            }
            let p = Point::new(x, y);
            if shape.contains(p) {
                out.push((i, j, p));
            }
            i += 1;
        }
        j += 1;
    }
    out
}

/// Uniform dots on the region's lattice.
pub fn dot_grid(shape: &Shape, spacing: f64, radius: f64) -> Vec<Mark> {
    lattice(shape, spacing)
        .into_iter()
        .map(|(_, _, center)| dot(&shape.key, center, radius, DOT_FILL))
        .collect()
}

fn dot(key: &str, center: Point, r: f64, fill: Rgb) -> Mark {
    Mark::new(MarkTag::Dot, Geom::Circle { center, r }, Style::fill(fill)).keyed(key)
}

pub fn region_mark(shape: &Shape, fill: Rgb, stroke: Rgb, stroke_width: f64) -> Mark {
    Mark::new(
        MarkTag::Region,
        Geom::Path(rings_path(shape.rings())),
        Style::fill(fill).with_stroke(stroke, stroke_width),
    )
    .keyed(shape.key.clone())
}

/// Base layer for all `shapes`, in input order.
pub fn render_base(spec: &BaseMapSpec, shapes: &[Shape], seed: u64) -> Result<Vec<Mark>, BaseMapError> {
    let (spacing, radius) = (spec.dot_spacing, spec.dot_radius);
    Ok(match spec.kind {
        BaseMapKind::Implicit => Vec::new(),
        BaseMapKind::MinimalPolitical => shapes
            .iter()
            .map(|s| {
                region_mark(
                    s,
                    spec.fill.unwrap_or(POLITICAL_FILL),
                    spec.stroke.unwrap_or(POLITICAL_STROKE),
                    spec.stroke_width,
                )
            })
            .collect(),
        BaseMapKind::ShapeBasedUniform => shapes
            .iter()
            .flat_map(|s| {
                let fill = spec.fill.unwrap_or(DOT_FILL);
                lattice(s, spacing)
                    .into_iter()
                    .map(move |(_, _, c)| dot(&s.key, c, radius, fill))
            })
            .collect(),
        BaseMapKind::ShapeBasedVaried => shapes
            .iter()
            .flat_map(|s| {
                let fill = spec.fill.unwrap_or(DOT_FILL);
                lattice(s, spacing).into_iter().map(move |(i, j, c)| {
                    let r = radius * (0.5 + dot_jitter(seed, &s.key, i, j));
                    dot(&s.key, c, r, fill)
                })
            })
            .collect(),
        kind @ (BaseMapKind::Topographic | BaseMapKind::Street) => {
            return Err(BaseMapError::UnsupportedBaseMap(kind));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(key: &str, x: f64, size: f64) -> Shape {
        Shape::from_ring(
            key,
            vec![
                Point::new(x, 0.0),
                Point::new(x + size, 0.0),
                Point::new(x + size, size),
                Point::new(x, size),
            ],
        )
    }

    fn centers(marks: &[Mark]) -> Vec<Point> {
        marks
            .iter()
            .map(|m| match m.geom {
                Geom::Circle { center, .. } => center,
                _ => panic!("not a dot"),
            })
            .collect()
    }

    #[test]
    fn ten_px_square_has_25_dots() {
        let dots = dot_grid(&square("a", 0.0, 10.0), 2.0, 0.5);
        assert_eq!(dots.len(), 25);
        let xs: Vec<f64> = centers(&dots).iter().take(5).map(|p| p.x).collect();
        assert_eq!(xs, [1.0, 3.0, 5.0, 7.0, 9.0]);
    }

    #[test]
    fn degenerate_region_has_no_dots() {
        let flat = Shape::from_ring("f", vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(9.0, 0.0)]);
        assert!(dot_grid(&flat, 2.0, 0.5).is_empty());
    }

    #[test]
    fn kinds() {
        let shapes = [square("a", 0.0, 10.0), square("b", 20.0, 10.0), square("c", 40.0, 10.0)];
        assert!(render_base(&BaseMapSpec::new(BaseMapKind::Implicit), &shapes, 0).unwrap().is_empty());
        assert_eq!(render_base(&BaseMapSpec::new(BaseMapKind::MinimalPolitical), &shapes, 0).unwrap().len(), 3);
        assert_eq!(
            render_base(&BaseMapSpec::new(BaseMapKind::Topographic), &shapes, 0),
            Err(BaseMapError::UnsupportedBaseMap(BaseMapKind::Topographic))
        );
        assert!(render_base(&BaseMapSpec::new(BaseMapKind::Street), &shapes, 0).is_err());
    }

    #[test]
    fn varied_radii_depend_only_on_seed() {
        let shapes = [square("a", 0.0, 60.0)];
        let spec = BaseMapSpec::new(BaseMapKind::ShapeBasedVaried);
        let one = render_base(&spec, &shapes, 7).unwrap();
        assert_eq!(one, render_base(&spec, &shapes, 7).unwrap());
        let other = render_base(&spec, &shapes, 8).unwrap();
        assert_eq!(centers(&one), centers(&other));
        assert_ne!(one, other);
        for m in &one {
            let Geom::Circle { r, .. } = m.geom else { unreachable!() };
            assert!((1.0..3.0).contains(&r));
        }
    }

    #[test]
    fn reversal_keeps_count() {
        let ring = vec![
            Point::new(0.0, 0.0),
            Point::new(30.0, 0.0),
            Point::new(30.0, 10.0),
            Point::new(10.0, 10.0),
            Point::new(10.0, 30.0),
            Point::new(0.0, 30.0),
        ];
        let mut rev = ring.clone();
        rev.reverse();
        assert_eq!(
            dot_grid(&Shape::from_ring("l", ring), 3.0, 1.0).len(),
            dot_grid(&Shape::from_ring("l", rev), 3.0, 1.0).len()
        );
    }
}
