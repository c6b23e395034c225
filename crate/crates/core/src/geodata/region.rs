use std::collections::HashMap;

use serde::Serialize;

use super::geometry::{point_in_rings, polygon_area, ring_centroid, signed_area2, Point, Rect};
use super::projection::Projection;
use super::GeoError;

/// Normalized join key: trimmed and lowercased.
pub fn normalize_key(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, GeoError> {
        if !lon.is_finite() || !lat.is_finite() || !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::InvalidCoordinate { lon, lat });
        }
        Ok(Self { lon, lat })
    }
}

/// Implicitly closed ring of at least three distinct, non-repeating vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    points: Vec<GeoPoint>,
}

impl Ring {
    /// Builds a ring, dropping a closing vertex and consecutive duplicates.
    pub fn new(mut points: Vec<GeoPoint>) -> Result<Self, GeoError> {
        points.dedup();
        while points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(GeoError::DegenerateRing);
        }
        let ring = Self { points };
        if ring.signed_area() == 0.0 {
            return Err(GeoError::DegenerateRing);
        }
        Ok(ring)
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    /// Signed area in lon/lat degrees², positive when counterclockwise.
    pub fn signed_area(&self) -> f64 {
        let pts: Vec<Point> = self.points.iter().map(|p| Point::new(p.lon, p.lat)).collect();
        signed_area2(&pts) / 2.0
    }

    fn oriented(mut self, counterclockwise: bool) -> Self {
        if (self.signed_area() > 0.0) != counterclockwise {
            self.points.reverse();
        }
        self
    }

    fn as_planar(&self) -> Vec<Point> {
        self.points.iter().map(|p| Point::new(p.lon, p.lat)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoPolygon {
    pub outer: Ring,
    pub holes: Vec<Ring>,
}

impl GeoPolygon {
    /// Normalizes winding (outer counterclockwise, holes clockwise) and
    /// checks that every hole sits inside the outer ring.
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self, GeoError> {
        let outer = outer.oriented(true);
        let planar_outer = outer.as_planar();
        let mut normalized = Vec::with_capacity(holes.len());
        for hole in holes {
            let hole = hole.oriented(false);
            let inside = hole.as_planar().iter().any(|p| point_in_rings(*p, [planar_outer.as_slice()]));
            if !inside {
                return Err(GeoError::HoleOutsideOuter);
            }
            normalized.push(hole);
        }
        Ok(Self {
            outer,
            holes: normalized,
        })
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub key: String,
    pub polygons: Vec<GeoPolygon>,
}

impl Region {
    pub fn new(name: impl Into<String>, polygons: Vec<GeoPolygon>) -> Result<Self, GeoError> {
        let name = name.into();
        let key = normalize_key(&name);
        if key.is_empty() {
            return Err(GeoError::EmptyName);
        }
        if polygons.is_empty() {
            return Err(GeoError::EmptyRegion(name));
        }
        Ok(Self { name, key, polygons })
    }

    pub fn points(&self) -> impl Iterator<Item = &GeoPoint> {
        self.polygons.iter().flat_map(|p| p.rings()).flat_map(|r| r.points())
    }

    pub fn project(&self, proj: &Projection) -> Shape {
        let polygons = self
            .polygons
            .iter()
            .map(|poly| {
                poly.rings()
                    .map(|ring| ring.points().iter().map(|p| proj.project(*p)).collect())
                    .collect()
            })
            .collect();
        Shape::new(self.key.clone(), polygons)
    }
}

/// Lon/lat bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoBounds {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl GeoBounds {
    pub const WORLD: GeoBounds = GeoBounds {
        min_lon: -180.0,
        min_lat: -90.0,
        max_lon: 180.0,
        max_lat: 90.0,
    };

    fn covering<'a>(points: impl Iterator<Item = &'a GeoPoint>) -> Option<Self> {
        points.fold(None, |acc: Option<GeoBounds>, p| {
            Some(match acc {
                None => GeoBounds {
                    min_lon: p.lon,
                    min_lat: p.lat,
                    max_lon: p.lon,
                    max_lat: p.lat,
                },
                Some(b) => GeoBounds {
                    min_lon: b.min_lon.min(p.lon),
                    min_lat: b.min_lat.min(p.lat),
                    max_lon: b.max_lon.max(p.lon),
                    max_lat: b.max_lat.max(p.lat),
                },
            })
        })
    }
}

#[derive(Debug, Clone)]
pub struct RegionSet {
    regions: Vec<Region>,
    bbox: GeoBounds,
    index: HashMap<String, usize>,
}

impl RegionSet {
    pub fn new(regions: Vec<Region>) -> Result<Self, GeoError> {
        let mut index = HashMap::with_capacity(regions.len());
        for (i, region) in regions.iter().enumerate() {
            if index.insert(region.key.clone(), i).is_some() {
                return Err(GeoError::DuplicateRegion(region.key.clone()));
            }
        }
        let bbox = GeoBounds::covering(regions.iter().flat_map(|r| r.points())).ok_or(GeoError::EmptyRegionSet)?;
        Ok(Self { regions, bbox, index })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn bbox(&self) -> GeoBounds {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Region> {
        self.index.get(key).map(|&i| &self.regions[i])
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }
}

/// A region projected to screen space. Each polygon is a list of rings,
/// the first being the outer boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub key: String,
    pub polygons: Vec<Vec<Vec<Point>>>,
}

impl Shape {
    pub fn new(key: impl Into<String>, polygons: Vec<Vec<Vec<Point>>>) -> Self {
        Self {
            key: key.into(),
            polygons,
        }
    }

    /// Convenience for tests and synthetic inputs: one polygon, no holes.
    pub fn from_ring(key: impl Into<String>, ring: Vec<Point>) -> Self {
        Self::new(key, vec![vec![ring]])
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> + Clone {
        self.polygons.iter().flat_map(|p| p.iter().map(|r| r.as_slice()))
    }

    /// Outer-ring areas minus hole areas.
    pub fn area(&self) -> f64 {
        self.polygons
            .iter()
            .map(|poly| {
                let mut rings = poly.iter();
                let outer = rings.next().map(|r| polygon_area(r)).unwrap_or(0.0);
                outer - rings.map(|r| polygon_area(r)).sum::<f64>()
            })
            .sum()
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::covering(self.rings().flat_map(|r| r.iter().copied())).unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0))
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_rings(p, self.rings())
    }

    /// Area-weighted centroid of all outer rings minus holes. Falls back to
    /// the nearest interior point of a bbox/64 grid when the centroid lies
    /// outside the region.
    pub fn anchor(&self) -> Result<Point, GeoError> {
        let total = self.area();
        if total < 1e-9 {
            return Err(GeoError::DegenerateRegion(self.key.clone()));
        }
        let (mut sx, mut sy, mut sa) = (0.0, 0.0, 0.0);
        for poly in &self.polygons {
            for (i, ring) in poly.iter().enumerate() {
                if let Some((c, a)) = ring_centroid(ring) {
                    let w = if i == 0 { a } else { -a };
                    sx += c.x * w;
                    sy += c.y * w;
                    sa += w;
                }
            }
        }
        let centroid = Point::new(sx / sa, sy / sa);
        if self.contains(centroid) {
            return Ok(centroid);
        }
        Ok(self.nearest_interior(centroid))
    }

    fn nearest_interior(&self, target: Point) -> Point {
        let bbox = self.bounding_box();
        for divisions in [64usize, 256, 1024] {
            if let Some(p) = self.nearest_grid_point(target, &bbox, divisions) {
                return p;
            }
        }
        self.scanline_interior(&bbox).unwrap_or(target)
    }

    fn nearest_grid_point(&self, target: Point, bbox: &Rect, divisions: usize) -> Option<Point> {
        let (sx, sy) = (bbox.width / divisions as f64, bbox.height / divisions as f64);
        let mut best: Option<(f64, Point)> = None;
        for j in 0..divisions {
            for i in 0..divisions {
                let p = Point::new(bbox.x + (i as f64 + 0.5) * sx, bbox.y + (j as f64 + 0.5) * sy);
                let d = p.distance(target);
                if best.is_some_and(|(bd, _)| d >= bd) {
                    continue;
                }
                if self.contains(p) {
                    best = Some((d, p));
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Midpoint of the widest interior span on a few horizontal scanlines.
    fn scanline_interior(&self, bbox: &Rect) -> Option<Point> {
        let mut best: Option<(f64, Point)> = None;
        for k in 1..16 {
            let y = bbox.y + bbox.height * k as f64 / 16.0;
            let mut xs: Vec<f64> = Vec::new();
            for ring in self.rings() {
                let n = ring.len();
                for i in 0..n {
                    let (a, b) = (ring[i], ring[(i + 1) % n]);
                    if (a.y > y) != (b.y > y) {
                        xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let width = pair[1] - pair[0];
                let mid = Point::new((pair[0] + pair[1]) / 2.0, y);
                if width > best.map_or(0.0, |b| b.0) && self.contains(mid) {
                    best = Some((width, mid));
                }
            }
        }
        best.map(|(_, p)| p)
    }
}
