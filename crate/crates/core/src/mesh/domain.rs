//! Domain description for mesh generation: the outer shape, inclusions with
//! optional coatings, and the material interfaces they induce.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{point_in_rings, segment_distance, signed_area};
use crate::{Error, Point, Result};

/// Phase label of inclusion material.
pub const INCLUSION_PHASE: u32 = 1;
/// Phase label of the matrix (or coating) material.
pub const MATRIX_PHASE: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterShape {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    /// Approximated by a regular polygon inscribed in the circle.
    Circle { center: [f64; 2], radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InclusionShape {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub shape: InclusionShape,
    /// Thickness of a matrix-phase coating around a disk inclusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coating: Option<f64>,
}

/// Parametric description of a composite domain.
///
/// Without coatings the domain is two-phase: inclusions carry
/// [`INCLUSION_PHASE`], everything else [`MATRIX_PHASE`]. When any inclusion
/// has a coating, the region outside every coating (and outside the optional
/// boundary layer) is void and produces no elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub outer: OuterShape,
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
    /// Width of a matrix band along the outer boundary (void-bearing domains).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_layer: Option<f64>,
}

/// A material interface approximated by chords.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceCurve {
    Circle { center: Point, radius: f64 },
    /// Closed polylines must be counter-clockwise; the inner side is the left.
    Polyline { points: Vec<Point>, closed: bool },
}

fn pt(a: [f64; 2]) -> Point {
    Point::new(a[0], a[1])
}

/// Number of chords used for a circle of `radius` at the given spacing.
pub fn circle_segments(radius: f64, spacing: f64, min: usize) -> usize {
    ((2.0 * PI * radius / spacing).ceil() as usize).max(min)
}

/// Vertices of the regular `n`-gon inscribed in a circle, counter-clockwise.
pub fn circle_polygon(center: Point, radius: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
        })
        .collect()
}

impl Inclusion {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Self { shape: InclusionShape::Disk { center, radius }, coating: None }
    }

    pub fn coated_disk(center: [f64; 2], radius: f64, coating: f64) -> Self {
        Self { shape: InclusionShape::Disk { center, radius }, coating: Some(coating) }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match &self.shape {
            InclusionShape::Disk { center, radius } => (p - pt(*center)).norm() < *radius,
            InclusionShape::Polygon { vertices } => {
                point_in_rings(p, &[vertices.iter().copied().map(pt).collect()])
            }
        }
    }

    pub fn coating_contains(&self, p: &Point) -> bool {
        match (&self.shape, self.coating) {
            (InclusionShape::Disk { center, radius }, Some(t)) => (p - pt(*center)).norm() < radius + t,
            _ => false,
        }
    }

    fn interface(&self) -> InterfaceCurve {
        match &self.shape {
            InclusionShape::Disk { center, radius } => InterfaceCurve::Circle { center: pt(*center), radius: *radius },
            InclusionShape::Polygon { vertices } => {
                let mut points: Vec<Point> = vertices.iter().copied().map(pt).collect();
                if signed_area(&points) < 0.0 {
                    points.reverse();
                }
                InterfaceCurve::Polyline { points, closed: true }
            }
        }
    }
}

impl DomainSpec {
    pub fn rectangle(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { outer: OuterShape::Rectangle { min, max }, inclusions: Vec::new(), boundary_layer: None }
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        Self { outer: OuterShape::Circle { center, radius }, inclusions: Vec::new(), boundary_layer: None }
    }

    pub fn with_inclusion(mut self, inclusion: Inclusion) -> Self {
        self.inclusions.push(inclusion);
        self
    }

    pub fn has_voids(&self) -> bool {
        self.inclusions.iter().any(|i| i.coating.is_some())
    }

    /// Counter-clockwise outer polygon used for clipping at `spacing`.
    pub fn outer_polygon(&self, spacing: f64) -> Vec<Point> {
        match self.outer {
            OuterShape::Rectangle { min, max } => vec![
                Point::new(min[0], min[1]),
                Point::new(max[0], min[1]),
                Point::new(max[0], max[1]),
                Point::new(min[0], max[1]),
            ],
            OuterShape::Circle { center, radius } => {
                circle_polygon(pt(center), radius, circle_segments(radius, spacing, 12))
            }
        }
    }

    /// Tag names carried by the edges of [`Self::outer_polygon`] in addition
    /// to `"outer"`.
    pub fn outer_edge_tags(&self, spacing: f64) -> Vec<Option<&'static str>> {
        match self.outer {
            OuterShape::Rectangle { .. } => vec![Some("bottom"), Some("right"), Some("top"), Some("left")],
            OuterShape::Circle { .. } => vec![None; self.outer_polygon(spacing).len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        let (inside, dist_to_outer): (Box<dyn Fn(&Point) -> bool>, Box<dyn Fn(&Point) -> f64>) = match self.outer {
            OuterShape::Rectangle { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1]) {
                    return bad("rectangle max must exceed min".into());
                }
                (
                    Box::new(move |p: &Point| p.x > min[0] && p.x < max[0] && p.y > min[1] && p.y < max[1]),
                    Box::new(move |p: &Point| {
                        (p.x - min[0]).min(max[0] - p.x).min(p.y - min[1]).min(max[1] - p.y)
                    }),
                )
            }
            OuterShape::Circle { center, radius } => {
                if !(radius > 0.0) {
                    return bad("circle radius must be positive".into());
                }
                (
                    Box::new(move |p: &Point| (p - pt(center)).norm() < radius),
                    Box::new(move |p: &Point| radius - (p - pt(center)).norm()),
                )
            }
        };
        for (k, inc) in self.inclusions.iter().enumerate() {
            match &inc.shape {
                InclusionShape::Disk { center, radius } => {
                    if !(*radius > 0.0) {
                        return bad(format!("inclusion {k} has non-positive radius"));
                    }
                    let reach = radius + inc.coating.unwrap_or(0.0);
                    if !(dist_to_outer(&pt(*center)) > reach) {
                        return bad(format!("inclusion {k} (with coating) is not strictly inside the outer shape"));
                    }
                }
                InclusionShape::Polygon { vertices } => {
                    if vertices.len() < 3 {
                        return bad(format!("inclusion {k} polygon has fewer than 3 vertices"));
                    }
                    if inc.coating.is_some() {
                        return bad(format!("inclusion {k}: coatings are only supported on disks"));
                    }
                    if !vertices.iter().all(|v| inside(&pt(*v))) {
                        return bad(format!("inclusion {k} is not strictly inside the outer shape"));
                    }
                }
            }
            if let Some(t) = inc.coating {
                if !(t > 0.0) {
                    return bad(format!("inclusion {k} has non-positive coating"));
                }
            }
        }
        if let Some(w) = self.boundary_layer {
            if !(w > 0.0) {
                return bad("boundary layer width must be positive".into());
            }
        }
        Ok(())
    }

    /// Phase at a point, `None` inside voids.
    pub fn phase_at(&self, p: &Point) -> Option<u32> {
        if self.inclusions.iter().any(|i| i.contains(p)) {
            return Some(INCLUSION_PHASE);
        }
        if !self.has_voids() || self.inclusions.iter().any(|i| i.coating_contains(p)) || self.in_boundary_layer(p) {
            return Some(MATRIX_PHASE);
        }
        None
    }

    fn in_boundary_layer(&self, p: &Point) -> bool {
        let Some(w) = self.boundary_layer else { return false };
        match self.outer {
            OuterShape::Rectangle { min, max } => {
                p.x < min[0] + w || p.x > max[0] - w || p.y < min[1] + w || p.y > max[1] - w
            }
            OuterShape::Circle { center, radius } => (p - pt(center)).norm() > radius - w,
        }
    }

    /// Material interfaces that need conforming element edges.
    pub fn interfaces(&self) -> Vec<InterfaceCurve> {
        let mut out: Vec<InterfaceCurve> = self.inclusions.iter().map(Inclusion::interface).collect();
        for inc in &self.inclusions {
            if let (InclusionShape::Disk { center, radius }, Some(t)) = (&inc.shape, inc.coating) {
                out.push(InterfaceCurve::Circle { center: pt(*center), radius: radius + t });
            }
        }
        if let (Some(w), true) = (self.boundary_layer, self.has_voids()) {
            match self.outer {
                OuterShape::Rectangle { min, max } => {
                    let (x0, y0, x1, y1) = (min[0] + w, min[1] + w, max[0] - w, max[1] - w);
                    out.push(InterfaceCurve::Polyline {
                        points: vec![
                            Point::new(x0, y0),
                            Point::new(x1, y0),
                            Point::new(x1, y1),
                            Point::new(x0, y1),
                        ],
                        closed: true,
                    });
                }
                OuterShape::Circle { center, radius } => {
                    out.push(InterfaceCurve::Circle { center: pt(center), radius: radius - w })
                }
            }
        }
        out
    }

    /// Whether the part of an interface near `p` separates different phases.
    pub fn is_interface_point(&self, p: &Point, probe: f64, normal: &crate::Vec2) -> bool {
        self.phase_at(&(p - normal * probe)) != self.phase_at(&(p + normal * probe))
    }

    /// Distance from `p` to the outer boundary (positive inside).
    pub fn distance_to_outer(&self, p: &Point) -> f64 {
        match self.outer {
            OuterShape::Rectangle { min, max } => {
                (p.x - min[0]).min(max[0] - p.x).min(p.y - min[1]).min(max[1] - p.y)
            }
            OuterShape::Circle { center, radius } => radius - (p - pt(center)).norm(),
        }
    }
}

impl InterfaceCurve {
    /// Chords approximating the curve, each no longer than `spacing`.
    /// Circle chords have both endpoints on the circle; the chords follow the
    /// counter-clockwise direction so the inner side is on the left.
    pub fn chords(&self, spacing: f64) -> Vec<[Point; 2]> {
        match self {
            InterfaceCurve::Circle { center, radius } => {
                let v = circle_polygon(*center, *radius, circle_segments(*radius, spacing, 6));
                (0..v.len()).map(|k| [v[k], v[(k + 1) % v.len()]]).collect()
            }
            InterfaceCurve::Polyline { points, closed } => {
                let n = points.len();
                let segs = if *closed { n } else { n - 1 };
                let mut out = Vec::new();
                for k in 0..segs {
                    let (a, b) = (points[k], points[(k + 1) % n]);
                    let m = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
                    for s in 0..m {
                        let t0 = s as f64 / m as f64;
                        let t1 = (s + 1) as f64 / m as f64;
                        out.push([a + (b - a) * t0, a + (b - a) * t1]);
                    }
                }
                out
            }
        }
    }

    /// Distance from `p` to the curve itself.
    pub fn distance(&self, p: &Point) -> f64 {
        match self {
            InterfaceCurve::Circle { center, radius } => ((p - center).norm() - radius).abs(),
            InterfaceCurve::Polyline { points, closed } => {
                let n = points.len();
                let segs = if *closed { n } else { n - 1 };
                (0..segs)
                    .map(|k| segment_distance(p, &points[k], &points[(k + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_of_two_and_three_phase_domains() {
        let d = DomainSpec::circle([0.0, 0.0], 1.0).with_inclusion(Inclusion::disk([0.0, 0.0], 0.25));
        d.validate().unwrap();
        assert_eq!(d.phase_at(&Point::new(0.1, 0.0)), Some(INCLUSION_PHASE));
        assert_eq!(d.phase_at(&Point::new(0.5, 0.0)), Some(MATRIX_PHASE));

        let mut t = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0])
            .with_inclusion(Inclusion::coated_disk([0.5, 0.5], 0.2, 0.05));
        t.boundary_layer = Some(0.05);
        t.validate().unwrap();
        assert_eq!(t.phase_at(&Point::new(0.5, 0.5)), Some(INCLUSION_PHASE));
        assert_eq!(t.phase_at(&Point::new(0.72, 0.5)), Some(MATRIX_PHASE));
        assert_eq!(t.phase_at(&Point::new(0.85, 0.85)), None);
        assert_eq!(t.phase_at(&Point::new(0.97, 0.5)), Some(MATRIX_PHASE));
        assert_eq!(t.interfaces().len(), 3);
    }

    #[test]
    fn validation_rejects_protruding_inclusions() {
        let d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0])
            .with_inclusion(Inclusion::coated_disk([0.5, 0.5], 0.45, 0.1));
        assert!(matches!(d.validate(), Err(Error::InvalidDomain(_))));
        let d = DomainSpec::circle([0.0, 0.0], 1.0).with_inclusion(Inclusion::disk([0.9, 0.0], 0.2));
        assert!(d.validate().is_err());
    }

    #[test]
    fn circle_chords_are_short_and_on_circle() {
        let c = InterfaceCurve::Circle { center: Point::new(1.0, 2.0), radius: 0.3 };
        let chords = c.chords(0.05);
        assert_eq!(chords.len(), circle_segments(0.3, 0.05, 6));
        for [a, b] in &chords {
            assert!((b - a).norm() <= 0.05);
            assert!(c.distance(a) < 1e-14);
        }
    }
}
