//! Planar geometry in screen space (pixels, y grows downward).

use serde::{Deserialize, Serialize};

/// Distance below which a point is treated as lying on an edge.
pub const EDGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// Axis-aligned rectangle, `x`/`y` at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn centered(center: Point, width: f64, height: f64) -> Self {
        Self::new(center.x - width / 2.0, center.y - height / 2.0, width, height)
    }

    /// Smallest rectangle covering all points; `None` for an empty iterator.
    pub fn covering(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (first.x, first.y, first.x, first.y);
        for p in iter {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        Some(Self::new(min_x, min_y, max_x - min_x, max_y - min_y))
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x, self.y),
            Point::new(self.right(), self.y),
            Point::new(self.right(), self.bottom()),
            Point::new(self.x, self.bottom()),
        ]
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(
            x,
            y,
            self.right().max(other.right()) - x,
            self.bottom().max(other.bottom()) - y,
        )
    }

    pub fn inflate(&self, pad: f64) -> Rect {
        Rect::new(
            self.x - pad,
            self.y - pad,
            self.width + 2.0 * pad,
            self.height + 2.0 * pad,
        )
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.right() && p.y >= self.y && p.y <= self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// True when the two rectangles overlap by more than `eps` along both axes.
    pub fn overlaps(&self, other: &Rect, eps: f64) -> bool {
        let ox = self.right().min(other.right()) - self.x.max(other.x);
        let oy = self.bottom().min(other.bottom()) - self.y.max(other.y);
        ox > eps && oy > eps
    }

    /// True when segment `a`-`b` passes through the interior of the
    /// rectangle shrunk by `eps` on every side.
    pub fn intersects_segment(&self, a: Point, b: Point, eps: f64) -> bool {
        let inner = self.inflate(-eps);
        if inner.width <= 0.0 || inner.height <= 0.0 {
            return false;
        }
        // Liang-Barsky clipping against the open interior.
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-dx, a.x - inner.x),
            (dx, inner.right() - a.x),
            (-dy, a.y - inner.y),
            (dy, inner.bottom() - a.y),
        ] {
            if p == 0.0 {
                if q <= 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        t0 < t1
    }

    /// Point on the rectangle boundary nearest to `p`. For interior points
    /// this is the projection onto the closest edge.
    pub fn nearest_boundary_point(&self, p: Point) -> Point {
        let cx = p.x.clamp(self.x, self.right());
        let cy = p.y.clamp(self.y, self.bottom());
        if !self.contains(p) || p.x == self.x || p.x == self.right() || p.y == self.y || p.y == self.bottom() {
            return Point::new(cx, cy);
        }
        let candidates = [
            (p.x - self.x, Point::new(self.x, p.y)),
            (self.right() - p.x, Point::new(self.right(), p.y)),
            (p.y - self.y, Point::new(p.x, self.y)),
            (self.bottom() - p.y, Point::new(p.x, self.bottom())),
        ];
        candidates
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, q)| q)
            .unwrap_or(p)
    }

    /// Boundary point where the ray from `from` toward the rectangle center
    /// enters the rectangle. Falls back to the nearest boundary point when
    /// `from` is inside.
    pub fn boundary_toward(&self, from: Point) -> Point {
        if self.contains(from) {
            return self.nearest_boundary_point(from);
        }
        let c = self.center();
        let (dx, dy) = (c.x - from.x, c.y - from.y);
        let mut t_enter: f64 = 0.0;
        for (p, q) in [
            (-dx, from.x - self.x),
            (dx, self.right() - from.x),
            (-dy, from.y - self.y),
            (dy, self.bottom() - from.y),
        ] {
            if p < 0.0 {
                t_enter = t_enter.max(q / p);
            }
        }
        let hit = Point::new(from.x + dx * t_enter, from.y + dy * t_enter);
        // Snap away float noise so the endpoint lies exactly on an edge.
        self.nearest_boundary_point(hit)
    }
}

/// Twice the signed area of a ring (positive for counterclockwise in a
/// y-up frame).
pub fn signed_area2(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        sum += a.x * b.y - b.x * a.y;
    }
    sum
}

/// Absolute shoelace area of an implicitly closed ring.
pub fn polygon_area(ring: &[Point]) -> f64 {
    (signed_area2(ring) / 2.0).abs()
}

/// Area centroid of a single ring; `None` when the ring has no area.
pub fn ring_centroid(ring: &[Point]) -> Option<(Point, f64)> {
    let n = ring.len();
    let a2 = signed_area2(ring);
    if n < 3 || a2 == 0.0 {
        return None;
    }
    // Shift to the first vertex to limit cancellation on large coordinates.
    let o = ring[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    let mut local_a2 = 0.0;
    for i in 0..n {
        let a = Point::new(ring[i].x - o.x, ring[i].y - o.y);
        let b = ring[(i + 1) % n];
        let b = Point::new(b.x - o.x, b.y - o.y);
        let cross = a.x * b.y - b.x * a.y;
        local_a2 += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    Some((
        Point::new(o.x + cx / (3.0 * local_a2), o.y + cy / (3.0 * local_a2)),
        (a2 / 2.0).abs(),
    ))
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// True when `p` lies within [`EDGE_EPSILON`] of any edge of the ring.
pub fn on_ring_edge(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    (0..n).any(|i| segment_distance(p, ring[i], ring[(i + 1) % n]) < EDGE_EPSILON)
}

/// Even-odd crossing parity for one ring (ignores the edge convention).
pub fn ring_crossings_odd(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Even-odd containment over a set of rings; points on any edge are outside.
pub fn point_in_rings<'a>(p: Point, rings: impl IntoIterator<Item = &'a [Point]> + Clone) -> bool {
    if rings.clone().into_iter().any(|r| on_ring_edge(p, r)) {
        return false;
    }
    rings
        .into_iter()
        .fold(false, |acc, r| acc ^ ring_crossings_odd(p, r))
}

/// Proper or touching intersection between segments `p1-p2` and `q1-q2`.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    fn orient(a: Point, b: Point, c: Point) -> f64 {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    }
    fn on_segment(a: Point, b: Point, p: Point) -> bool {
        p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}
