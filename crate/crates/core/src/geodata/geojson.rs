//! GeoJSON subset: a `FeatureCollection` of `Polygon` / `MultiPolygon`
//! features, each carrying a name property.

use serde_json::{json, Value};

use super::antimeridian::split_ring;
use super::region::{GeoPoint, GeoPolygon, Region, RegionSet, Ring};
use super::GeoError;

pub const DEFAULT_NAME_PROPERTY: &str = "name";

pub fn parse_boundaries(text: &str) -> Result<RegionSet, GeoError> {
    parse_boundaries_with(text, DEFAULT_NAME_PROPERTY)
}

pub fn parse_boundaries_with(text: &str, name_property: &str) -> Result<RegionSet, GeoError> {
    let root: Value = serde_json::from_str(text).map_err(|e| GeoError::MalformedInput(e.to_string()))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(malformed("top level must be a FeatureCollection"));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("FeatureCollection without a features array"))?;

    let mut regions = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let name = feature
            .get("properties")
            .and_then(|p| p.get(name_property))
            .and_then(Value::as_str)
            .ok_or_else(|| malformed(&format!("feature {i} has no string property {name_property:?}")))?;
        let geometry = feature
            .get("geometry")
            .filter(|g| !g.is_null())
            .ok_or_else(|| malformed(&format!("feature {i} has no geometry")))?;
        let kind = geometry
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed(&format!("feature {i} geometry has no type")))?;
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| malformed(&format!("feature {i} geometry has no coordinates")))?;
        let polygons = match kind {
            "Polygon" => parse_polygon(coords)?,
            "MultiPolygon" => {
                let mut all = Vec::new();
                for poly in as_array(coords)? {
                    all.extend(parse_polygon(poly)?);
                }
                all
            }
            other => return Err(GeoError::UnsupportedGeometry(other.to_string())),
        };
        regions.push(Region::new(name, polygons)?);
    }
    RegionSet::new(regions)
}

/// One polygon, or several when the outer ring crosses the antimeridian.
/// Holes go to the first piece that contains them.
fn parse_polygon(value: &Value) -> Result<Vec<GeoPolygon>, GeoError> {
    let rings = as_array(value)?;
    let (outer, holes) = rings.split_first().ok_or_else(|| malformed("polygon without rings"))?;
    let outers = split_ring(parse_points(outer)?);
    if outers.len() == 1 {
        let outer = Ring::new(outers.into_iter().next().unwrap_or_default())?;
        let holes = holes
            .iter()
            .map(|h| parse_points(h).and_then(Ring::new))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(vec![GeoPolygon::new(outer, holes)?]);
    }
    let mut pieces: Vec<(Ring, Vec<Ring>)> = outers
        .into_iter()
        .filter_map(|pts| Ring::new(pts).ok())
        .map(|r| (r, Vec::new()))
        .collect();
    for hole in holes {
        for part in split_ring(parse_points(hole)?) {
            let Ok(ring) = Ring::new(part) else { continue };
            if let Some(slot) = pieces
                .iter_mut()
                .find(|(outer, _)| GeoPolygon::new(outer.clone(), vec![ring.clone()]).is_ok())
            {
                slot.1.push(ring);
            }
        }
    }
    pieces.into_iter().map(|(outer, holes)| GeoPolygon::new(outer, holes)).collect()
}

fn parse_points(value: &Value) -> Result<Vec<GeoPoint>, GeoError> {
    as_array(value)?
        .iter()
        .map(|pos| {
            let pair = as_array(pos)?;
            match (pair.first().and_then(Value::as_f64), pair.get(1).and_then(Value::as_f64)) {
                (Some(lon), Some(lat)) => GeoPoint::new(lon, lat),
                _ => Err(malformed("position must hold two numbers")),
            }
        })
        .collect()
}

fn as_array(value: &Value) -> Result<&Vec<Value>, GeoError> {
    value.as_array().ok_or_else(|| malformed("expected an array of coordinates"))
}

fn malformed(msg: &str) -> GeoError {
    GeoError::MalformedInput(msg.to_string())
}

/// Serializes a region set back to the GeoJSON subset (always `MultiPolygon`,
/// rings explicitly closed).
pub fn to_geojson(set: &RegionSet) -> String {
    let ring_json = |ring: &Ring| {
        let mut pts: Vec<Value> = ring.points().iter().map(|p| json!([p.lon, p.lat])).collect();
        if let Some(first) = pts.first().cloned() {
            pts.push(first);
        }
        Value::Array(pts)
    };
    let features: Vec<Value> = set
        .regions()
        .iter()
        .map(|region| {
            let polys: Vec<Value> = region
                .polygons
                .iter()
                .map(|poly| Value::Array(poly.rings().map(ring_json).collect()))
                .collect();
            json!({
                "type": "Feature",
                "properties": { "name": region.name },
                "geometry": { "type": "MultiPolygon", "coordinates": polys },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features }).to_string()
}
