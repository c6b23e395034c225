use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{Point, Rect};
use super::region::{GeoBounds, GeoPoint};

/// Latitude limit of the square web-Mercator world.
pub const MERCATOR_MAX_LAT: f64 = 85.051129;

/// Fraction of the viewport kept free on each side when fitting.
pub const DEFAULT_MARGIN: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    #[default]
    Equirectangular,
    Mercator,
}

/// Lon/lat to pixel mapping fitted to a target rectangle.
///
/// Both projections produce unit coordinates where one unit spans 360° of
/// longitude, so the fit uses a single scale factor for both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    kind: ProjectionKind,
    scale: f64,
    offset_x: f64,
    offset_y: f64,
}

impl Projection {
    /// Fits `bounds` inside a `width`×`height` viewport with the default 4% margin.
    pub fn fit(kind: ProjectionKind, width: f64, height: f64, bounds: GeoBounds) -> Self {
        Self::fit_rect(kind, Rect::new(0.0, 0.0, width, height), bounds, DEFAULT_MARGIN)
    }

    /// Fits `bounds` inside `target`, keeping `margin` (a fraction of the
    /// target's width and height) free on each side, centered.
    pub fn fit_rect(kind: ProjectionKind, target: Rect, bounds: GeoBounds, margin: f64) -> Self {
        let corner_a = unit(kind, bounds.min_lon, bounds.max_lat);
        let corner_b = unit(kind, bounds.max_lon, bounds.min_lat);
        let (dx, dy) = (corner_b.x - corner_a.x, corner_b.y - corner_a.y);
        let avail_w = target.width * (1.0 - 2.0 * margin);
        let avail_h = target.height * (1.0 - 2.0 * margin);
        let scale = match (dx > 0.0, dy > 0.0) {
            (true, true) => (avail_w / dx).min(avail_h / dy),
            (true, false) => avail_w / dx,
            (false, true) => avail_h / dy,
            (false, false) => 1.0,
        };
        let center = target.center();
        Self {
            kind,
            scale,
            offset_x: center.x - scale * (corner_a.x + dx / 2.0),
            offset_y: center.y - scale * (corner_a.y + dy / 2.0),
        }
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn project(&self, p: GeoPoint) -> Point {
        let u = unit(self.kind, p.lon, p.lat);
        Point::new(self.offset_x + self.scale * u.x, self.offset_y + self.scale * u.y)
    }
}

/// Unit-space coordinates before fitting; y grows southward.
fn unit(kind: ProjectionKind, lon: f64, lat: f64) -> Point {
    let x = (lon + 180.0) / 360.0;
    let y = match kind {
        ProjectionKind::Equirectangular => (90.0 - lat) / 360.0,
        ProjectionKind::Mercator => {
            let phi = lat.clamp(-MERCATOR_MAX_LAT, MERCATOR_MAX_LAT).to_radians();
            (PI - (PI / 4.0 + phi / 2.0).tan().ln()) / (2.0 * PI)
        }
    };
    Point::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(kind: ProjectionKind) -> Projection {
        Projection::fit_rect(kind, Rect::new(0.0, 0.0, 800.0, 400.0), GeoBounds::WORLD, 0.0)
    }

    #[test]
    fn center_maps_to_center() {
        let p = world(ProjectionKind::Equirectangular).project(GeoPoint::new(0.0, 0.0).unwrap());
        assert!((p.x - 400.0).abs() < 1e-9 && (p.y - 200.0).abs() < 1e-9);
    }

    #[test]
    fn corner_maps_to_origin() {
        let p = world(ProjectionKind::Equirectangular).project(GeoPoint::new(-180.0, 90.0).unwrap());
        assert!(p.x.abs() < 1e-9 && p.y.abs() < 1e-9);
    }

    #[test]
    fn mercator_clamps_latitude() {
        let proj = world(ProjectionKind::Mercator);
        let a = proj.project(GeoPoint::new(10.0, 89.0).unwrap());
        let b = proj.project(GeoPoint::new(10.0, MERCATOR_MAX_LAT).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn margin_is_kept() {
        let proj = Projection::fit(ProjectionKind::Equirectangular, 1000.0, 500.0, GeoBounds::WORLD);
        let tl = proj.project(GeoPoint::new(-180.0, 90.0).unwrap());
        let br = proj.project(GeoPoint::new(180.0, -90.0).unwrap());
        assert!((tl.x - 40.0).abs() < 1e-9);
        assert!((br.x - 960.0).abs() < 1e-9);
        assert!(tl.y >= 20.0 - 1e-9 && br.y <= 480.0 + 1e-9);
    }
}
