//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.
//!
//! Oracles here are written independently of the library: winding numbers,
//! raster area, brute-force lattices and pairwise overlap checks.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use geoglyph::basemap::dot_grid;
use geoglyph::dataio::{join, parse_data};
use geoglyph::designspace::{
    check_compatibility, validate, BaseMapKind, ChannelKind, ChannelSpec, CompatibilityMatrix, Compatibility,
    InfographicSpec,
};
use geoglyph::encode::{
    assign_colors, dorling_relax, encode_length2d, encode_quantity, encode_size, ColorMode, Datum, DorlingCircle,
};
use geoglyph::gallery::GALLERY;
use geoglyph::geodata::{
    point_in_region, GeoPoint, GeoPolygon, Point, Projection, ProjectionKind, Rect, Region, RegionSet, Ring,
};
use geoglyph::labels::{place_linked_aligned, place_linked_convenient, LabelItem, ObstacleSet, PlacedLabel, Side};
use geoglyph::pipeline::Engine;
use geoglyph::scales::symbol_radius;
use geoglyph::scene::{Geom, MarkTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- oracles

/// Winding number of `p` over closed rings (nonzero = inside).
fn winding(p: Point, rings: &[Vec<Point>]) -> i32 {
    let mut w = 0;
    for ring in rings {
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
            if a.y <= p.y {
                if b.y > p.y && side > 0.0 {
                    w += 1;
                }
            } else if b.y <= p.y && side < 0.0 {
                w -= 1;
            }
        }
    }
    w
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * dx - p.x, a.y + t * dy - p.y);
    (qx * qx + qy * qy).sqrt()
}

fn near_edge(p: Point, rings: &[Vec<Point>], eps: f64) -> bool {
    rings
        .iter()
        .any(|r| (0..r.len()).any(|i| seg_dist(p, r[i], r[(i + 1) % r.len()]) < eps))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Segments cross at a point interior to both, or overlap collinearly
/// over a positive length.
fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let collinear = [d1, d2, d3, d4].iter().all(|d| d.abs() < 1e-9);
    if !collinear {
        return false;
    }
    let along = |p: Point| if (p2.x - p1.x).abs() >= (p2.y - p1.y).abs() { p.x } else { p.y };
    let (a0, a1) = (along(p1).min(along(p2)), along(p1).max(along(p2)));
    let (b0, b1) = (along(q1).min(along(q2)), along(q1).max(along(q2)));
    a1.min(b1) - a0.max(b0) > 1e-9
}

fn rects_overlap(a: &Rect, b: &Rect, eps: f64) -> bool {
    let ox = (a.x + a.width).min(b.x + b.width) - a.x.max(b.x);
    let oy = (a.y + a.height).min(b.y + b.height) - a.y.max(b.y);
    ox > eps && oy > eps
}

/// Liang-Barsky: does segment ab enter `r` shrunk by `eps`?
fn segment_hits_rect(a: Point, b: Point, r: &Rect, eps: f64) -> bool {
    let (x0, x1, y0, y1) = (r.x + eps, r.x + r.width - eps, r.y + eps, r.y + r.height - eps);
    if x0 >= x1 || y0 >= y1 {
        return false;
    }
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (p, q) in [(-dx, a.x - x0), (dx, x1 - a.x), (-dy, a.y - y0), (dy, y1 - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    t0 < t1
}

/// Pixel centers `x0 + (col + 0.5) * sx`, `col < n`, with nonzero winding on
/// the scanline at `y`.
fn raster_row(rings: &[Vec<Point>], y: f64, x0: f64, sx: f64, n: usize) -> u64 {
    let mut crossings: Vec<(f64, i32)> = Vec::new();
    for ring in rings {
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            let dir = if a.y <= y && b.y > y {
                1
            } else if b.y <= y && a.y > y {
                -1
            } else {
                continue;
            };
            crossings.push((a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x), dir));
        }
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first_at_or_after = |x: f64| ((x - x0) / sx - 0.5).ceil().clamp(0.0, n as f64) as u64;
    let mut count = 0;
    let mut w = 0;
    for pair in crossings.windows(2) {
        w += pair[0].1;
        if w != 0 {
            count += first_at_or_after(pair[1].0) - first_at_or_after(pair[0].0);
        }
    }
    count
}

// ------------------------------------------------------------- generators

/// Star-shaped ring around `c` with vertices at sorted random angles.
fn star(rng: &mut ChaCha8Rng, c: (f64, f64), radius: f64, min_share: f64) -> Vec<(f64, f64)> {
    let n = rng.gen_range(5..24);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    angles
        .iter()
        .map(|a| {
            let r = radius * rng.gen_range(min_share..1.0);
            (c.0 + r * a.cos(), c.1 + r * a.sin())
        })
        .collect()
}

fn geo_ring(coords: &[(f64, f64)]) -> Ring {
    Ring::new(coords.iter().map(|&(lon, lat)| GeoPoint::new(lon, lat).unwrap()).collect()).unwrap()
}

/// Random region (sometimes with a hole) and a projection fitting it in
/// 1000x1000.
fn random_region(rng: &mut ChaCha8Rng, i: usize) -> (Region, Projection) {
    let c = (rng.gen_range(-140.0..140.0), rng.gen_range(-55.0..55.0));
    let radius = rng.gen_range(4.0..24.0);
    let outer = geo_ring(&star(rng, c, radius, 0.4));
    let holes = if i.is_multiple_of(3) {
        vec![geo_ring(&star(rng, c, radius * 0.3, 0.5))]
    } else {
        Vec::new()
    };
    let region = Region::new(format!("r{i}"), vec![GeoPolygon::new(outer, holes).unwrap()]).unwrap();
    let kind = if i.is_multiple_of(2) {
        ProjectionKind::Equirectangular
    } else {
        ProjectionKind::Mercator
    };
    let bounds = RegionSet::new(vec![region.clone()]).unwrap().bbox();
    (region, Projection::fit(kind, 1000.0, 1000.0, bounds))
}

fn projected_rings(region: &Region, proj: &Projection) -> Vec<Vec<Point>> {
    region.project(proj).rings().map(|r| r.to_vec()).collect()
}

fn bbox_of(rings: &[Vec<Point>]) -> Rect {
    Rect::covering(rings.iter().flatten().copied()).unwrap()
}

// ------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    use ChannelKind::*;
    let start = Instant::now();
    enum Want {
        Yes,
        No(&'static str),
        Unspecified,
    }
    let mut table: Vec<(ChannelKind, ChannelKind, bool, Want)> = vec![
        (ColorIntensity, ColorHue, false, Want::No("color spectrum")),
        (Length2D, Length3D, false, Want::No("length")),
        (DirectionalFlow, NonDirectionalFlow, false, Want::No("mutually exclusive")),
        (Size, Length2D, false, Want::No("size of a line")),
        (Size, Length3D, false, Want::No("size of a line")),
        (Size, Quantity, false, Want::No("multiplication")),
        (ColorHue, Length2D, false, Want::Yes),
        (ColorHue, Length3D, false, Want::Yes),
        (ColorIntensity, Length2D, false, Want::Yes),
        (ColorIntensity, Length3D, false, Want::Yes),
        (ColorHue, Size, false, Want::Yes),
        (ColorIntensity, Quantity, false, Want::Yes),
        (Glyph, ColorHue, false, Want::No("")),
        (Glyph, ColorHue, true, Want::Yes),
        (Glyph, ColorIntensity, false, Want::No("")),
        (Glyph, ColorIntensity, true, Want::Yes),
        (Glyph, Size, false, Want::Yes),
        (Quantity, Glyph, false, Want::Yes),
        (Quantity, DirectionalFlow, false, Want::Yes),
        (Quantity, NonDirectionalFlow, false, Want::Yes),
        (DirectionalFlow, ColorHue, false, Want::Yes),
        (NonDirectionalFlow, ColorIntensity, false, Want::Yes),
        (Length2D, Quantity, false, Want::Unspecified),
        (Glyph, DirectionalFlow, false, Want::Unspecified),
    ];
    for other in ChannelKind::ALL.into_iter().filter(|k| *k != Text) {
        table.push((Text, other, false, Want::Yes));
    }
    for (a, b, mono, want) in &table {
        let got = check_compatibility(*a, *b, *mono);
        let ok = match (want, &got) {
            (Want::Yes, Compatibility::Compatible) => true,
            (Want::No(phrase), Compatibility::Incompatible { reason }) => reason.contains(phrase),
            (Want::Unspecified, Compatibility::Unspecified { .. }) => true,
            _ => false,
        };
        ensure(ok, || format!("{a:?} x {b:?} (mono={mono}) gave {got:?}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{} adjudicated pairs match", table.len()))
}

fn criterion_2() -> Outcome {
    let m = CompatibilityMatrix::bundled();
    ensure(m.pairs().len() == 45, || format!("{} unordered pairs", m.pairs().len()))?;
    let mut seen = 0;
    for a in ChannelKind::ALL {
        for b in ChannelKind::ALL {
            for mono in [false, true] {
                let (ab, ba) = (check_compatibility(a, b, mono), check_compatibility(b, a, mono));
                ensure(ab == ba, || format!("{a:?}/{b:?} asymmetric: {ab:?} vs {ba:?}"))?;
                if a == b {
                    ensure(matches!(ab, Compatibility::Incompatible { .. }), || format!("{a:?} diagonal gave {ab:?}"))?;
                }
                seen += 1;
            }
        }
    }
    Ok(format!("{seen} ordered lookups symmetric, diagonal rejected, 45 pairs"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_area: f64 = 0.0;
    let mut checked = 0;
    for i in 0..20 {
        let (region, proj) = random_region(&mut rng, i);
        let shape = region.project(&proj);
        let rings = projected_rings(&region, &proj);
        let bb = bbox_of(&rings);
        let (n, sx, sy) = (1000, bb.width / 1000.0, bb.height / 1000.0);
        let inside: u64 = (0..n)
            .map(|row| raster_row(&rings, bb.y + (row as f64 + 0.5) * sy, bb.x, sx, n))
            .sum();
        let raster = inside as f64 * sx * sy;
        let rel = (shape.area() - raster).abs() / raster;
        worst_area = worst_area.max(rel);
        ensure(rel < 0.01, || format!("polygon {i}: area {} vs raster {raster} ({rel:.4})", shape.area()))?;

        let outer = bb.inflate(0.1 * bb.width.max(bb.height));
        let eps = 1e-6 * bb.width.max(bb.height);
        let mut tested = 0;
        while tested < 1000 {
            let p = Point::new(
                rng.gen_range(outer.x..outer.x + outer.width),
                rng.gen_range(outer.y..outer.y + outer.height),
            );
            if near_edge(p, &rings, eps) {
                continue;
            }
            tested += 1;
            let want = winding(p, &rings) != 0;
            ensure(point_in_region(p, &region, &proj) == want, || {
                format!("polygon {i}: point ({}, {}) expected inside={want}", p.x, p.y)
            })?;
        }
        checked += tested;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "20 polygons, worst area error {:.3}%, {checked} points agree",
        worst_area * 100.0
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0;
    for i in 0..10 {
        let (region, proj) = random_region(&mut rng, i);
        let shape = region.project(&proj);
        let rings = projected_rings(&region, &proj);
        let spacing = rng.gen_range(6.0..20.0);
        let dots = dot_grid(&shape, spacing, spacing * 0.3);
        for d in &dots {
            let Geom::Circle { center, .. } = d.geom else {
                return Err(format!("polygon {i}: dot is not a circle"));
            };
            ensure(point_in_region(center, &region, &proj), || {
                format!("polygon {i}: dot ({}, {}) outside", center.x, center.y)
            })?;
        }
        let bb = bbox_of(&rings);
        let mut expected = 0;
        let mut y = bb.y + spacing / 2.0;
        while y < bb.y + bb.height {
            let mut x = bb.x + spacing / 2.0;
            while x < bb.x + bb.width {
                if winding(Point::new(x, y), &rings) != 0 {
                    expected += 1;
                }
                x += spacing;
            }
            y += spacing;
        }
        ensure(dots.len() == expected, || format!("polygon {i}: {} dots, lattice has {expected}", dots.len()))?;
        total += dots.len();
    }
    Ok(format!("10 polygons, {total} dots all inside, counts exact"))
}

fn datum(i: usize, v: f64, anchor: Point) -> Datum {
    Datum {
        key: format!("k{i:03}"),
        name: format!("Region {i}"),
        anchor,
        value: Some(v),
        category: None,
        label: None,
        order: i,
    }
}

fn luminance(c: geoglyph::color::Rgb) -> f64 {
    0.2126 * c.r as f64 + 0.7152 * c.g as f64 + 0.0722 * c.b as f64
}

/// Checks `enc` is monotone in `values` (strictly when `strict`) and that
/// every argmax gets `extreme`.
fn monotone(
    name: &str,
    values: &BTreeMap<String, f64>,
    enc: &BTreeMap<String, f64>,
    strict: bool,
    extreme: f64,
) -> Result<(), String> {
    ensure(enc.len() == values.len(), || format!("{name}: {} of {} encoded", enc.len(), values.len()))?;
    for (ka, va) in values {
        for (kb, vb) in values {
            let (ea, eb) = (enc[ka], enc[kb]);
            if va < vb {
                let ok = if strict { ea < eb } else { ea <= eb };
                ensure(ok, || format!("{name}: {ka}={va} -> {ea} but {kb}={vb} -> {eb}"))?;
            }
        }
    }
    let vmax = values.values().cloned().fold(f64::MIN, f64::max);
    for (k, v) in values {
        if *v == vmax {
            ensure((enc[k] - extreme).abs() < 1e-9, || format!("{name}: argmax {k} got {} not {extreme}", enc[k]))?;
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for set in 0..100 {
        let n = rng.gen_range(3..30);
        let scale = 10f64.powi(rng.gen_range(-2..6));
        let data: Vec<Datum> = (0..n)
            .map(|i| {
                let v = (rng.gen_range(0.01..1.0) * scale * 1000.0).round() / 1000.0;
                datum(i, v.max(scale * 1e-3), Point::new(rng.gen_range(0.0..900.0), rng.gen_range(60.0..500.0)))
            })
            .collect();
        let values: BTreeMap<String, f64> = data.iter().map(|d| (d.key.clone(), d.value.unwrap())).collect();
        let fail = |e: String| format!("dataset {set}: {e}");

        let spec = ChannelSpec::new(ChannelKind::Length2D);
        let bars = encode_length2d(&data, &spec).map_err(|e| fail(e.to_string()))?;
        let heights: BTreeMap<String, f64> = bars
            .marks
            .iter()
            .filter_map(|m| match (&m.key, &m.geom) {
                (Some(k), Geom::Rect { rect, .. }) => Some((k.clone(), rect.height)),
                _ => None,
            })
            .collect();
        monotone("bar height", &values, &heights, true, spec.max_height()).map_err(fail)?;

        let spec = ChannelSpec::new(ChannelKind::Size);
        let circles = encode_size(&data, &spec).map_err(|e| fail(e.to_string()))?;
        let radii: BTreeMap<String, f64> = circles
            .marks
            .iter()
            .filter_map(|m| match (&m.key, &m.geom) {
                (Some(k), Geom::Circle { r, .. }) => Some((k.clone(), *r)),
                _ => None,
            })
            .collect();
        monotone("radius", &values, &radii, true, spec.max_radius()).map_err(fail)?;

        let spec = ChannelSpec::new(ChannelKind::ColorIntensity);
        let colors = assign_colors(&data, &spec, ColorMode::Intensity).map_err(|e| fail(e.to_string()))?;
        // Ramp runs light to dark: darkness is the encoded position.
        let darkness: BTreeMap<String, f64> = colors.fills.iter().map(|(k, c)| (k.clone(), -luminance(*c))).collect();
        let darkest = darkness.values().cloned().fold(f64::MIN, f64::max);
        monotone("ramp position", &values, &darkness, false, darkest).map_err(fail)?;
        let vmin = values.values().cloned().fold(f64::MAX, f64::min);
        let vmax = values.values().cloned().fold(f64::MIN, f64::max);
        if vmin < vmax {
            let (kmin, kmax) = (
                values.iter().find(|(_, v)| **v == vmin).unwrap().0,
                values.iter().find(|(_, v)| **v == vmax).unwrap().0,
            );
            ensure(darkness[kmin] < darkness[kmax], || fail("ramp ends coincide".into()))?;
        }

        let spec = ChannelSpec::new(ChannelKind::Quantity);
        let icons = encode_quantity(&data, &spec).map_err(|e| fail(e.to_string()))?;
        let mut counts: BTreeMap<String, f64> = values.keys().map(|k| (k.clone(), 0.0)).collect();
        for m in icons.marks.iter().filter(|m| m.tag == MarkTag::Icon) {
            *counts.get_mut(m.key.as_ref().unwrap()).unwrap() += 1.0;
        }
        let most = counts.values().cloned().fold(0.0, f64::max);
        monotone("icon count", &values, &counts, false, most).map_err(fail)?;
        ensure(most >= 1.0, || fail("argmax has no icons".into()))?;
    }
    Ok("100 datasets: heights, radii, ramp positions, icon counts monotone".into())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut most_passes = 0;
    for inst in 0..50 {
        let values: Vec<f64> = (0..10).map(|_| rng.gen_range(1.0..1000.0)).collect();
        let vmax = values.iter().cloned().fold(0.0, f64::max);
        let circles: Vec<DorlingCircle> = values
            .iter()
            .enumerate()
            .map(|(i, v)| DorlingCircle {
                key: format!("c{i}"),
                center: Point::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0)),
                r: symbol_radius(*v, vmax, 40.0),
            })
            .collect();
        let out = dorling_relax(circles);
        ensure(out.passes <= 512, || format!("instance {inst}: {} passes", out.passes))?;
        for (i, a) in out.circles.iter().enumerate() {
            for b in &out.circles[i + 1..] {
                let depth = a.r + b.r - a.center.distance(b.center);
                let ratio = depth / a.r.min(b.r);
                worst = worst.max(ratio);
                ensure(ratio <= 0.005, || format!("instance {inst}: {} and {} overlap {ratio:.5}", a.key, b.key))?;
            }
        }
        let by_key: BTreeMap<&str, f64> = out.circles.iter().map(|c| (c.key.as_str(), c.r)).collect();
        let k0 = std::f64::consts::PI * by_key["c0"].powi(2) / values[0];
        for (i, v) in values.iter().enumerate() {
            let k = std::f64::consts::PI * by_key[format!("c{i}").as_str()].powi(2) / v;
            ensure(((k - k0) / k0).abs() < 1e-6, || format!("instance {inst}: area ratio {k} vs {k0}"))?;
        }
        most_passes = most_passes.max(out.passes);
    }
    Ok(format!(
        "50 instances, worst overlap {:.4}% of smaller radius, at most {most_passes} passes",
        worst * 100.0
    ))
}

const WORDS: [&str; 12] = [
    "Alta", "Borealis", "Cerro", "Delta", "Estuary", "Fjord", "Gulf", "Highlands", "Isthmus", "Jura", "Karst",
    "Lagoon",
];

fn label_items(rng: &mut ChaCha8Rng, map: Rect, n: usize) -> Vec<LabelItem> {
    (0..n)
        .map(|i| {
            let words = rng.gen_range(1..4);
            let text: Vec<&str> = (0..words).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
            let anchor = Point::new(
                rng.gen_range(map.x + 10.0..map.x + map.width - 10.0),
                rng.gen_range(map.y + 10.0..map.y + map.height - 10.0),
            );
            LabelItem::new(anchor, format!("l{i:02}"), &text.join(" "), rng.gen_range(0.0..100.0)).unwrap()
        })
        .collect()
}

fn leader_segments(labels: &[&PlacedLabel]) -> Vec<(usize, Point, Point)> {
    labels
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            l.leader
                .iter()
                .flat_map(move |pts| pts.windows(2).map(move |w| (i, w[0], w[1])))
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bounds = Rect::new(0.0, 0.0, 960.0, 540.0);
    let mut placed_total = 0;
    for inst in 0..50 {
        let items = label_items(&mut rng, Rect::new(60.0, 40.0, 840.0, 460.0), 20);
        let mut obstacles = ObstacleSet::new();
        let mut rects = Vec::new();
        let mut segs = Vec::new();
        for _ in 0..6 {
            let r = Rect::new(rng.gen_range(0.0..900.0), rng.gen_range(0.0..500.0), rng.gen_range(5.0..40.0), rng.gen_range(5.0..40.0));
            obstacles.add_rect(r);
            rects.push(r);
        }
        for _ in 0..2 {
            let pts: Vec<Point> = (0..4)
                .map(|_| Point::new(rng.gen_range(0.0..960.0), rng.gen_range(0.0..540.0)))
                .collect();
            obstacles.add_polyline(&pts);
            segs.extend(pts.windows(2).map(|w| (w[0], w[1])));
        }
        let out = place_linked_convenient(&items, &obstacles, Some(bounds), 10.0);
        let placed = &out.placed;
        for (i, a) in placed.iter().enumerate() {
            for b in &placed[i + 1..] {
                ensure(!rects_overlap(&a.rect, &b.rect, 0.01), || {
                    format!("instance {inst}: labels {} and {} overlap", a.key, b.key)
                })?;
            }
            for r in &rects {
                ensure(!rects_overlap(&a.rect, r, 0.01), || format!("instance {inst}: {} hits an obstacle rect", a.key))?;
            }
            for (p, q) in &segs {
                ensure(!segment_hits_rect(*p, *q, &a.rect, 0.01), || {
                    format!("instance {inst}: {} hits an obstacle line", a.key)
                })?;
            }
        }
        placed_total += placed.len();

        let map = Rect::new(180.0, 20.0, 600.0, 500.0);
        let items = label_items(&mut rng, map, 20);
        let aligned = place_linked_aligned(&items, &[Side::Left, Side::Right], map, bounds, 10.0)
            .map_err(|e| format!("instance {inst}: aligned failed: {e}"))?;
        ensure(aligned.len() == 20, || format!("instance {inst}: aligned placed {}", aligned.len()))?;
        for side in [Side::Left, Side::Right] {
            let group: Vec<&PlacedLabel> = aligned
                .iter()
                .filter(|l| (l.rect.center().x < map.x) == (side == Side::Left))
                .collect();
            let segments = leader_segments(&group);
            for (a, sa) in segments.iter().enumerate() {
                for sb in &segments[a + 1..] {
                    ensure(sa.0 == sb.0 || !segments_cross(sa.1, sa.2, sb.1, sb.2), || {
                        format!("instance {inst}: {side:?} leaders of {} and {} cross", group[sa.0].key, group[sb.0].key)
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "50 convenient instances ({placed_total} labels placed) collision-free; 50 aligned instances crossing-free"
    ))
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let engine = Engine::world();
    let bless = std::env::var_os("GEOGLYPH_BLESS").is_some();
    ensure(GALLERY.len() >= 6, || format!("only {} gallery specs", GALLERY.len()))?;
    for entry in &GALLERY {
        let first = engine.render(entry.spec, entry.data);
        let second = engine.render(entry.spec, entry.data);
        let svg = first.svg.ok_or_else(|| format!("{}: did not render: {}", entry.name, first.report.to_json()))?;
        ensure(second.svg.as_deref() == Some(svg.as_str()), || format!("{}: renders differ", entry.name))?;
        roxmltree::Document::parse(&svg).map_err(|e| format!("{}: invalid XML: {e}", entry.name))?;
        let path = golden_dir().join(format!("{}.svg", entry.name));
        if bless {
            std::fs::write(&path, &svg).map_err(|e| format!("{}: {e}", path.display()))?;
            continue;
        }
        let golden = std::fs::read_to_string(&path)
            .map_err(|e| format!("{}: missing golden ({e}); run with GEOGLYPH_BLESS=1", entry.name))?;
        ensure(golden == svg, || format!("{}: differs from golden", entry.name))?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "{} gallery specs byte-identical across runs and against goldens{}",
        GALLERY.len(),
        if bless { " (goldens rewritten)" } else { "" }
    ))
}

fn data_json(rows: &[serde_json::Value]) -> String {
    serde_json::Value::Array(rows.to_vec()).to_string()
}

fn criterion_9() -> Outcome {
    let engine = Engine::world();
    let regions = engine.regions();
    let names: Vec<String> = regions.regions().iter().map(|r| r.name.clone()).collect();

    let cats = data_json(&[
        serde_json::json!({"name": "France", "value": "a"}),
        serde_json::json!({"name": "Spain", "value": "b"}),
        serde_json::json!({"name": "Italy", "value": "a"}),
    ]);
    let report = engine.validate(r#"{"channels":[{"kind":"length_2d"}]}"#, &cats);
    ensure(!report.is_valid(), || "length_2d on categorical data accepted".into())?;
    ensure(
        report.suggestions.iter().any(|s| s.channels.contains(&ChannelKind::ColorHue)),
        || format!("no color_hue suggestion: {}", report.to_json()),
    )?;

    let nums = r#"[{"name":"France","value":1}]"#;
    let report = engine.validate(r#"{"basemap":"topographic","channels":[{"kind":"color_intensity"}]}"#, nums);
    ensure(report.has_code("unsupported_basemap"), || format!("topographic: {}", report.to_json()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut invalid = 0;
    let mut attempts = 0;
    while invalid < 100 {
        attempts += 1;
        ensure(attempts < 10_000, || "could not generate enough invalid specs".into())?;
        let n = rng.gen_range(3..15);
        let picked: Vec<&String> = (0..n).map(|_| &names[rng.gen_range(0..names.len())]).collect();
        let rows: Vec<serde_json::Value> = match rng.gen_range(0..3) {
            0 => picked
                .iter()
                .map(|name| serde_json::json!({"name": name, "value": rng.gen_range(1.0..100.0)}))
                .collect(),
            1 => picked
                .iter()
                .map(|name| {
                    let value = ["x", "y", "z"][rng.gen_range(0..3)];
                    serde_json::json!({"name": name, "value": value})
                })
                .collect(),
            _ => picked
                .iter()
                .map(|name| {
                    let to = &names[rng.gen_range(0..names.len())];
                    serde_json::json!({"name": name, "to": to, "value": rng.gen_range(1.0..100.0)})
                })
                .collect(),
        };
        let table = parse_data(&data_json(&rows)).map_err(|e| e.to_string())?;
        let joined = join(regions, &table, None).map_err(|e| e.to_string())?;
        let a = ChannelKind::ALL[rng.gen_range(0..10)];
        let mut channels = vec![ChannelSpec::new(a)];
        if rng.gen_bool(0.7) {
            let b = ChannelKind::ALL[rng.gen_range(0..10)];
            if b != a {
                channels.push(ChannelSpec::new(b));
            }
        }
        let mut spec = InfographicSpec::new(channels);
        spec.basemap.kind = BaseMapKind::MinimalPolitical;
        let report = validate(&spec, &joined, regions);
        if report.is_valid() {
            continue;
        }
        invalid += 1;
        let top = report
            .suggestions
            .first()
            .ok_or_else(|| format!("no suggestion for {:?} on {:?}", spec.channels, joined.field_kind))?;
        let fixed = top.apply(&spec);
        let again = validate(&fixed, &joined, regions);
        ensure(again.is_valid(), || {
            format!("suggestion {:?} for {:?} still invalid: {}", top.channels, spec.channels, again.to_json())
        })?;
    }
    Ok(format!("categorical length_2d and topographic rejected; 100/100 top suggestions valid ({attempts} specs drawn)"))
}

fn criterion_10() -> Outcome {
    let engine = Engine::world();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rows: Vec<serde_json::Value> = engine
        .regions()
        .regions()
        .iter()
        .map(|r| {
            let value = (rng.gen_range(1.0..1000.0_f64) * 10.0).round() / 10.0;
            let category = ["north", "south", "east", "west"][rng.gen_range(0..4)];
            serde_json::json!({"name": r.name, "value": value, "category": category})
        })
        .collect();
    let data = data_json(&rows);
    let spec = r#"{
        "title": "Performance check",
        "channels": [{"kind": "color_hue"}, {"kind": "length_2d"}],
        "labels": {"strategy": "linked_convenient"},
        "highlights": [{"kind": "zoomed_inset", "target": "Switzerland"}]
    }"#;
    let start = Instant::now();
    let out = engine.render(spec, &data);
    let elapsed = start.elapsed();
    let svg = out.svg.ok_or_else(|| format!("did not render: {}", out.report.to_json()))?;
    ensure(svg.contains("layer-inset"), || "no inset layer in output".into())?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{} regions, dual encoding + labels + inset in {elapsed:?}", rows.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("matrix conformance", criterion_1),
        ("symmetry and totality", criterion_2),
        ("geometry oracles", criterion_3),
        ("dot-grid soundness", criterion_4),
        ("encoding order preservation", criterion_5),
        ("dorling convergence", criterion_6),
        ("label collision freedom", criterion_7),
        ("determinism and goldens", criterion_8),
        ("validation behavior", criterion_9),
        ("performance", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || id.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{:?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
