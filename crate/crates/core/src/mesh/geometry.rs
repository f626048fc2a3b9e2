//! Planar polygon primitives: shoelace moments, diameters, point location and
//! half-plane clipping of convex polygons.

use crate::{Error, Point, Result, Vec2};

/// Area, centroid and diameter of a (possibly multiply connected) polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonGeometry {
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

/// Signed shoelace area of a closed ring; positive for counter-clockwise.
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut twice = 0.0;
    for k in 0..n {
        let a = ring[k];
        let b = ring[(k + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

/// Signed area and signed first moments `(∫x, ∫y)` of a ring.
fn ring_moments(ring: &[Point]) -> (f64, f64, f64) {
    let n = ring.len();
    // Shift to the first vertex to keep the cross products well conditioned.
    let o = ring[0];
    let (mut a2, mut mx, mut my) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let p = ring[k] - o;
        let q = ring[(k + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        a2 += cross;
        mx += (p.x + q.x) * cross;
        my += (p.y + q.y) * cross;
    }
    let area = 0.5 * a2;
    (area, mx / 6.0 + area * o.x, my / 6.0 + area * o.y)
}

/// Geometry of a polygon given as rings: the first ring is the outer
/// boundary (counter-clockwise), later rings are holes (clockwise).
pub fn polygon_geometry(loops: &[Vec<Point>]) -> Result<PolygonGeometry> {
    let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
    for (ring, pts) in loops.iter().enumerate() {
        if pts.len() < 3 {
            return Err(Error::InvalidRing { ring, len: pts.len() });
        }
        let (a, x, y) = ring_moments(pts);
        area += a;
        mx += x;
        my += y;
    }
    if loops.is_empty() || !(area > 0.0) {
        return Err(Error::MalformedElement { area });
    }
    let centroid = Point::new(mx / area, my / area);
    let diameter = diameter(loops.iter().flatten());
    Ok(PolygonGeometry { area, centroid, diameter })
}

/// Largest pairwise distance in a point set.
pub fn diameter<'a>(points: impl IntoIterator<Item = &'a Point>) -> f64 {
    let pts: Vec<&Point> = points.into_iter().collect();
    let mut d2: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d2 = d2.max((*a - *b).norm_squared());
        }
    }
    d2.sqrt()
}

/// Even-odd point-in-polygon test over all rings.
pub fn point_in_rings(p: &Point, loops: &[Vec<Point>]) -> bool {
    let mut inside = false;
    for ring in loops {
        let n = ring.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (ring[i], ring[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
    }
    inside
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Outward normal of a directed edge on a counter-clockwise ring: the edge
/// direction rotated 90° clockwise, normalized. Applied to a clockwise hole
/// ring it points into the hole, i.e. out of the surrounding region.
pub fn outward_normal(a: &Point, b: &Point) -> Vec2 {
    let d = b - a;
    Vec2::new(d.y, -d.x) / d.norm()
}

/// Convex polygon whose edges carry a label identifying the line that
/// produced them. Edge `k` runs from `vertices[k]` to `vertices[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon<L> {
    pub vertices: Vec<Point>,
    pub labels: Vec<L>,
}

impl<L: Copy> LabeledPolygon<L> {
    pub fn new(vertices: Vec<Point>, labels: Vec<L>) -> Self {
        assert_eq!(vertices.len(), labels.len());
        Self { vertices, labels }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Keeps the part of the polygon with `(x - origin) · normal <= 0`; the
    /// new edge along the cutting line receives `label`.
    pub fn clip(&self, origin: &Point, normal: &Vec2, label: L) -> Self {
        let n = self.vertices.len();
        let mut vertices = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        let side: Vec<f64> = self.vertices.iter().map(|v| (v - origin).dot(normal)).collect();
        for k in 0..n {
            let next = (k + 1) % n;
            let (sa, sb) = (side[k], side[next]);
            let (a, b) = (self.vertices[k], self.vertices[next]);
            if sa <= 0.0 {
                vertices.push(a);
                if sb > 0.0 {
                    labels.push(self.labels[k]);
                    vertices.push(a + (b - a) * (sa / (sa - sb)));
                    labels.push(label);
                } else {
                    labels.push(self.labels[k]);
                }
            } else if sb <= 0.0 {
                vertices.push(a + (b - a) * (sa / (sa - sb)));
                labels.push(self.labels[k]);
            }
        }
        Self { vertices, labels }
    }

    /// Largest distance from `p` to a vertex.
    pub fn radius_about(&self, p: &Point) -> f64 {
        self.vertices.iter().map(|v| (v - p).norm()).fold(0.0, f64::max)
    }
}
