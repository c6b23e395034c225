//! Rings that cross the ±180 meridian arrive with a jump of nearly 360°
//! between neighbouring vertices. Drawn naively that jump becomes a streak
//! across the whole map, so such rings are cut into one piece per side.

use super::region::GeoPoint;

fn wrap_delta(d: f64) -> f64 {
    if d > 180.0 {
        d - 360.0
    } else if d < -180.0 {
        d + 360.0
    } else {
        d
    }
}

/// Keeps the half-plane `sign * (lon - seam) <= 0` of a closed ring.
fn clip(points: &[(f64, f64)], seam: f64, sign: f64) -> Vec<(f64, f64)> {
    let inside = |p: &(f64, f64)| sign * (p.0 - seam) <= 0.0;
    let mut out = Vec::new();
    for (i, cur) in points.iter().enumerate() {
        let prev = &points[(i + points.len() - 1) % points.len()];
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(*cur),
            (true, false) => out.push(crossing(prev, cur, seam)),
            (false, true) => {
                out.push(crossing(prev, cur, seam));
                out.push(*cur);
            }
            (false, false) => {}
        }
    }
    out
}

fn crossing(a: &(f64, f64), b: &(f64, f64), seam: f64) -> (f64, f64) {
    let t = (seam - a.0) / (b.0 - a.0);
    (seam, a.1 + t * (b.1 - a.1))
}

/// Splits a ring at the antimeridian. Rings without a jump, and rings that
/// wind around a pole (whose jump is a real edge along a parallel), are
/// returned unchanged.
pub fn split_ring(points: Vec<GeoPoint>) -> Vec<Vec<GeoPoint>> {
    let n = points.len();
    if n < 3 || !(0..n).any(|i| (points[(i + 1) % n].lon - points[i].lon).abs() > 180.0) {
        return vec![points];
    }
    let mut unwrapped = Vec::with_capacity(n);
    let mut lon = points[0].lon;
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            lon += wrap_delta(p.lon - points[i - 1].lon);
        }
        unwrapped.push((lon, p.lat));
    }
    let closing = lon + wrap_delta(points[0].lon - points[n - 1].lon) - points[0].lon;
    if closing.abs() > 180.0 {
        return vec![points];
    }
    let (max, min) = unwrapped
        .iter()
        .fold((f64::MIN, f64::MAX), |(hi, lo), p| (hi.max(p.0), lo.min(p.0)));
    let (seam, shift): (f64, f64) = if max > 180.0 {
        (180.0, -360.0)
    } else if min < -180.0 {
        (-180.0, 360.0)
    } else {
        return vec![points];
    };
    let near = clip(&unwrapped, seam, -shift.signum());
    let far = clip(&unwrapped, seam, shift.signum());
    let to_geo = |pts: Vec<(f64, f64)>, dx: f64| -> Vec<GeoPoint> {
        pts.into_iter()
            .map(|(x, y)| GeoPoint {
                lon: (x + dx).clamp(-180.0, 180.0),
                lat: y,
            })
            .collect()
    };
    [to_geo(near, 0.0), to_geo(far, shift)]
        .into_iter()
        .filter(|r| r.len() >= 3)
        .collect()
}
