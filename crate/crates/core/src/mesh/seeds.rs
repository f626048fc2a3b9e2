//! Generator-point placement: Poisson-disk style random seeds and mirrored
//! seed pairs that pin Voronoi facets onto material interfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::domain::{DomainSpec, InterfaceCurve};
use super::geometry::{segment_distance, signed_area};
use crate::{Error, Point, Result, Vec2};

/// Fraction of the target spacing below which two random seeds are rejected.
pub const MIN_SEPARATION: f64 = 0.5;

/// Uniform bucket grid over a bounding box, used for neighbor queries.
pub(crate) struct BucketGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl BucketGrid {
    pub(crate) fn new(min: Point, max: Point, cell: f64) -> Self {
        let nx = (((max.x - min.x) / cell).ceil() as usize).max(1);
        let ny = (((max.y - min.y) / cell).ceil() as usize).max(1);
        Self { origin: min, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] }
    }

    pub(crate) fn index(&self, p: &Point) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    pub(crate) fn insert(&mut self, p: &Point, id: usize) {
        let (i, j) = self.index(p);
        self.buckets[j * self.nx + i].push(id);
    }

    /// Ids in buckets whose Chebyshev ring distance from `p`'s bucket is
    /// exactly `ring`. Returns `false` once the ring lies fully outside.
    pub(crate) fn ring(&self, p: &Point, ring: usize, out: &mut Vec<usize>) -> bool {
        let (ci, cj) = self.index(p);
        let (ci, cj, r) = (ci as isize, cj as isize, ring as isize);
        let mut any = false;
        for j in (cj - r)..=(cj + r) {
            if j < 0 || j >= self.ny as isize {
                continue;
            }
            for i in (ci - r)..=(ci + r) {
                if i < 0 || i >= self.nx as isize {
                    continue;
                }
                if (i - ci).abs() != r && (j - cj).abs() != r {
                    continue;
                }
                any = true;
                out.extend_from_slice(&self.buckets[j as usize * self.nx + i as usize]);
            }
        }
        any
    }

    pub(crate) fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Ids within `radius` bucket rings of `p` (a superset of the ball).
    pub(crate) fn near(&self, p: &Point, radius: f64, out: &mut Vec<usize>) {
        let rings = (radius / self.cell).ceil() as usize + 1;
        for r in 0..=rings {
            self.ring(p, r, out);
        }
    }
}

fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    (min, max)
}

/// Strictly inside a counter-clockwise convex polygon.
pub(crate) fn inside_convex(p: &Point, poly: &[Point]) -> bool {
    let n = poly.len();
    (0..n).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        (b - a).perp(&(p - a)) > 0.0
    })
}

/// Random seeds inside the domain's outer polygon with pairwise distance at
/// least `MIN_SEPARATION * spacing`. The seed count is `area / spacing²`
/// (rounded); the sequence is fully determined by `rng_seed`.
pub fn generate_seeds(domain: &DomainSpec, spacing: f64, rng_seed: u64) -> Result<Vec<Point>> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidDomain(format!("spacing must be positive, got {spacing}")));
    }
    let poly = domain.outer_polygon(spacing);
    let area = signed_area(&poly);
    let wanted = (area / (spacing * spacing)).round() as usize;
    if wanted < 2 {
        return Err(Error::InfeasibleSpacing { placed: 0, wanted: 2 });
    }
    let min_dist = MIN_SEPARATION * spacing;
    let (lo, hi) = bounding_box(&poly);
    let mut grid = BucketGrid::new(lo, hi, min_dist);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<Point> = Vec::with_capacity(wanted);
    let mut near = Vec::new();
    let max_attempts = 100 * wanted;
    let mut attempts = 0;
    while seeds.len() < wanted {
        if attempts == max_attempts {
            return Err(Error::InfeasibleSpacing { placed: seeds.len(), wanted });
        }
        attempts += 1;
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if !inside_convex(&p, &poly) {
            continue;
        }
        near.clear();
        grid.near(&p, min_dist, &mut near);
        if near.iter().any(|&k| (seeds[k] - p).norm() < min_dist) {
            continue;
        }
        grid.insert(&p, seeds.len());
        seeds.push(p);
    }
    Ok(seeds)
}

/// Two seeds mirrored across an interface chord; their Voronoi bisector is
/// the chord's supporting line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePair {
    /// Seed on the left of the chord direction (the inside of a
    /// counter-clockwise curve).
    pub inner: Point,
    pub outer: Point,
    pub chord: [Point; 2],
}

impl InterfacePair {
    pub fn midpoint(&self) -> Point {
        nalgebra::center(&self.chord[0], &self.chord[1])
    }

    /// Unit normal pointing from the inner to the outer seed.
    pub fn normal(&self) -> Vec2 {
        (self.outer - self.inner).normalize()
    }

    /// Distance from the seeds to the chord endpoints.
    pub fn reach(&self) -> f64 {
        (self.inner - self.chord[0]).norm()
    }
}

/// Mirrored seed pairs for every chord of `curve`, placed at `±offset`
/// along the chord normal through the chord midpoint.
pub fn interface_pairs(curve: &InterfaceCurve, spacing: f64, offset: f64) -> Result<Vec<InterfacePair>> {
    if !(offset > 0.0) || offset >= spacing {
        return Err(Error::DegeneratePair { offset, spacing });
    }
    Ok(curve
        .chords(spacing)
        .into_iter()
        .map(|chord| {
            let d = chord[1] - chord[0];
            let n = Vec2::new(d.y, -d.x).normalize();
            let m = nalgebra::center(&chord[0], &chord[1]);
            InterfacePair { inner: m - n * offset, outer: m + n * offset, chord }
        })
        .collect())
}

/// Clearance a regular seed must keep from an interface chord so that the
/// chord stays a Voronoi facet of its pair.
pub(crate) fn chord_clearance(spacing: f64, offset: f64) -> f64 {
    1.05 * (offset * offset + 0.25 * spacing * spacing).sqrt()
}

/// Replaces the seeds near `curve` by mirrored pairs: seeds closer to an
/// interface chord than the pair reach are removed, then the pairs appended.
pub fn mirror_seeds_across_interface(
    seeds: &[Point],
    curve: &InterfaceCurve,
    spacing: f64,
    offset: f64,
) -> Result<Vec<Point>> {
    let pairs = interface_pairs(curve, spacing, offset)?;
    let clearance = chord_clearance(spacing, offset);
    let mut out: Vec<Point> = seeds
        .iter()
        .filter(|s| pairs.iter().all(|p| segment_distance(s, &p.chord[0], &p.chord[1]) >= clearance))
        .copied()
        .collect();
    for p in &pairs {
        out.push(p.inner);
        out.push(p.outer);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::domain::DomainSpec;

    #[test]
    fn separation_and_determinism() {
        let d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]);
        let a = generate_seeds(&d, 0.5, 7).unwrap();
        let b = generate_seeds(&d, 0.5, 7).unwrap();
        assert_eq!(a, b);
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                assert!((a[i] - a[j]).norm() >= 0.25);
            }
        }
        let fine = generate_seeds(&d, 0.05, 3).unwrap();
        for i in 0..fine.len() {
            for j in i + 1..fine.len() {
                assert!((fine[i] - fine[j]).norm() >= 0.025);
            }
        }
    }

    #[test]
    fn count_tracks_density() {
        let d = DomainSpec::rectangle([0.0, 0.0], [2.0, 1.0]);
        let spacing = 0.07;
        let expected = 2.0 / (spacing * spacing);
        for seed in 0..10 {
            let n = generate_seeds(&d, spacing, seed).unwrap().len() as f64;
            assert!(n > expected / 2.0 && n < expected * 2.0, "seed {seed}: {n} vs {expected}");
        }
    }

    #[test]
    fn infeasible_spacing() {
        let d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]);
        assert!(matches!(generate_seeds(&d, 5.0, 1), Err(Error::InfeasibleSpacing { .. })));
    }

    #[test]
    fn pair_bisector_is_chord_line() {
        let line = InterfaceCurve::Polyline { points: vec![Point::new(0.0, 0.5), Point::new(1.0, 0.5)], closed: false };
        let pairs = interface_pairs(&line, 1.0 / 3.0, 0.1).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            let mid = nalgebra::center(&p.inner, &p.outer);
            assert!((mid.y - 0.5).abs() < 1e-15);
            assert!(p.normal().x.abs() < 1e-15);
        }
        assert!(matches!(interface_pairs(&line, 0.1, 0.2), Err(Error::DegeneratePair { .. })));
    }

    #[test]
    fn mirroring_clears_nearby_seeds() {
        let c = InterfaceCurve::Circle { center: Point::new(0.0, 0.0), radius: 0.5 };
        let seeds = vec![Point::new(0.5, 0.01), Point::new(0.0, 0.0)];
        let out = mirror_seeds_across_interface(&seeds, &c, 0.1, 0.06).unwrap();
        assert!(out.contains(&Point::new(0.0, 0.0)));
        assert!(!out.contains(&Point::new(0.5, 0.01)));
        assert_eq!(out.len(), 1 + 2 * c.chords(0.1).len());
    }
}
