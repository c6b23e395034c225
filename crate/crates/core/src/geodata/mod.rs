//! Region boundaries, projection to screen space and planar geometry.
//!
//! Boundaries arrive as lon/lat [`RegionSet`]s; everything downstream works
//! on projected [`Shape`]s in pixels.

mod antimeridian;
mod geojson;
pub mod geometry;
mod projection;
mod region;

use thiserror::Error;

pub use geojson::{parse_boundaries, parse_boundaries_with, to_geojson, DEFAULT_NAME_PROPERTY};
pub use geometry::{point_in_rings, polygon_area, Point, Rect};
pub use projection::{Projection, ProjectionKind, DEFAULT_MARGIN, MERCATOR_MAX_LAT};
pub use region::{normalize_key, GeoBounds, GeoPoint, GeoPolygon, Region, RegionSet, Ring, Shape};

/// World boundaries bundled with the crate (177 countries, 1:110m).
pub const WORLD_GEOJSON: &str = include_str!("../../data/world.geojson");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("malformed boundary input: {0}")]
    MalformedInput(String),
    #[error("unsupported geometry type {0:?} (only Polygon and MultiPolygon)")]
    UnsupportedGeometry(String),
    #[error("duplicate region key {0:?}")]
    DuplicateRegion(String),
    #[error("coordinate out of range: lon {lon}, lat {lat}")]
    InvalidCoordinate { lon: f64, lat: f64 },
    #[error("ring has fewer than three distinct vertices or zero area")]
    DegenerateRing,
    #[error("hole lies outside its outer ring")]
    HoleOutsideOuter,
    #[error("region name is empty")]
    EmptyName,
    #[error("region {0:?} has no polygons")]
    EmptyRegion(String),
    #[error("boundary set contains no regions")]
    EmptyRegionSet,
    #[error("region {0:?} has no projected area")]
    DegenerateRegion(String),
}

/// Projected area-weighted anchor of `region` (see [`Shape::anchor`]).
pub fn centroid(region: &Region, proj: &Projection) -> Result<Point, GeoError> {
    region.project(proj).anchor()
}

pub fn point_in_region(p: Point, region: &Region, proj: &Projection) -> bool {
    region.project(proj).contains(p)
}

pub fn bounding_box(region: &Region, proj: &Projection) -> Rect {
    region.project(proj).bounding_box()
}

/// Loads the bundled world fixture.
pub fn world() -> RegionSet {
    parse_boundaries(WORLD_GEOJSON).expect("bundled world fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_fixture_loads_and_anchors() {
        let set = world();
        assert_eq!(set.len(), 177);
        let proj = Projection::fit(ProjectionKind::Equirectangular, 960.0, 540.0, set.bbox());
        for region in set.regions() {
            let shape = region.project(&proj);
            let anchor = shape.anchor().unwrap();
            assert!(shape.contains(anchor), "{}", region.key);
        }
    }
}
