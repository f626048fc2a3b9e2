//! Voronoi diagram clipped to a convex domain, computed cell by cell through
//! half-plane intersection.

use rayon::prelude::*;

use super::geometry::{diameter, signed_area, LabeledPolygon};
use super::seeds::{inside_convex, BucketGrid};
use crate::{Error, Point, Result, Vec2};

/// Line that produced a cell edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeSource {
    /// Edge `k` of the domain polygon.
    Boundary(usize),
    /// Bisector with the given seed.
    Seed(usize),
}

/// Segment shared by the cells of two seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub seeds: [usize; 2],
    pub endpoints: [Point; 2],
    pub midpoint: Point,
    pub length: f64,
    /// Unit normal pointing from the first seed toward the second.
    pub normal: Vec2,
}

#[derive(Debug, Clone)]
pub struct VoronoiTessellation {
    pub seeds: Vec<Point>,
    /// Counter-clockwise convex clipping polygon.
    pub domain: Vec<Point>,
    pub cells: Vec<LabeledPolygon<EdgeSource>>,
    /// Interior facets with `seeds[0] < seeds[1]`, ordered by seed pair.
    pub facets: Vec<Facet>,
}

impl VoronoiTessellation {
    pub fn domain_diameter(&self) -> f64 {
        diameter(&self.domain)
    }

    /// Tolerance below which points are considered coincident.
    pub fn merge_tolerance(&self) -> f64 {
        1e-9 * self.domain_diameter()
    }

    pub fn cell_area(&self, k: usize) -> f64 {
        signed_area(&self.cells[k].vertices)
    }

    /// Whether the cell of seed `k` touches the domain boundary.
    pub fn touches_boundary(&self, k: usize) -> bool {
        let tol = self.merge_tolerance();
        let cell = &self.cells[k];
        cell.labels.iter().enumerate().any(|(e, l)| {
            matches!(l, EdgeSource::Boundary(_))
                && (cell.vertices[(e + 1) % cell.len()] - cell.vertices[e]).norm() > tol
        })
    }

    /// Domain edges touched by the cell of seed `k`.
    pub fn boundary_edges_of(&self, k: usize) -> Vec<usize> {
        let tol = self.merge_tolerance();
        let cell = &self.cells[k];
        let mut out: Vec<usize> = cell
            .labels
            .iter()
            .enumerate()
            .filter_map(|(e, l)| match l {
                EdgeSource::Boundary(b) if (cell.vertices[(e + 1) % cell.len()] - cell.vertices[e]).norm() > tol => {
                    Some(*b)
                }
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn is_convex_ccw(poly: &[Point]) -> bool {
    let n = poly.len();
    n >= 3
        && (0..n).all(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            let c = poly[(k + 2) % n];
            (b - a).perp(&(c - b)) > 0.0
        })
}

/// Clipped Voronoi tessellation of `seeds` inside the convex polygon `domain`.
pub fn clipped_voronoi(seeds: &[Point], domain: &[Point]) -> Result<VoronoiTessellation> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSeeds(seeds.len()));
    }
    if !is_convex_ccw(domain) {
        return Err(Error::InvalidDomain("clipping polygon must be convex and counter-clockwise".into()));
    }
    if let Some(k) = seeds.iter().position(|s| !inside_convex(s, domain)) {
        return Err(Error::SeedOutsideDomain(k));
    }
    let diam = diameter(domain);
    let (mut lo, mut hi) = (domain[0], domain[0]);
    for p in domain {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let area = signed_area(domain);
    let cell = (area / seeds.len() as f64).sqrt().max(1e-12 * diam);
    let mut grid = BucketGrid::new(lo, hi, cell);
    for (k, s) in seeds.iter().enumerate() {
        grid.insert(s, k);
    }

    let dup_tol = 1e-12 * diam;
    let mut near = Vec::new();
    for (k, s) in seeds.iter().enumerate() {
        near.clear();
        grid.near(s, dup_tol, &mut near);
        if let Some(&j) = near.iter().find(|&&j| j != k && (seeds[j] - s).norm() <= dup_tol) {
            return Err(Error::DuplicateSeeds(k.min(j), k.max(j)));
        }
    }

    let base = LabeledPolygon::new(domain.to_vec(), (0..domain.len()).map(EdgeSource::Boundary).collect());
    let cells: Vec<LabeledPolygon<EdgeSource>> = (0..seeds.len())
        .into_par_iter()
        .map(|k| voronoi_cell(k, seeds, &base, &grid))
        .collect();

    let facets = collect_facets(seeds, &cells, 1e-9 * diam);
    Ok(VoronoiTessellation { seeds: seeds.to_vec(), domain: domain.to_vec(), cells, facets })
}

fn voronoi_cell(
    k: usize,
    seeds: &[Point],
    base: &LabeledPolygon<EdgeSource>,
    grid: &BucketGrid,
) -> LabeledPolygon<EdgeSource> {
    let s = seeds[k];
    let mut cell = base.clone();
    let mut candidates = Vec::new();
    let mut ring = 0;
    loop {
        candidates.clear();
        if !grid.ring(&s, ring, &mut candidates) {
            break;
        }
        // Process in a fixed order so results do not depend on bucket layout.
        candidates.sort_by(|&a, &b| {
            let da = (seeds[a] - s).norm_squared();
            let db = (seeds[b] - s).norm_squared();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        for &j in &candidates {
            if j == k {
                continue;
            }
            let d = seeds[j] - s;
            if d.norm() >= 2.0 * cell.radius_about(&s) {
                continue;
            }
            let mid = nalgebra::center(&s, &seeds[j]);
            cell = cell.clip(&mid, &d, EdgeSource::Seed(j));
        }
        // Seeds beyond this ring are at least `ring * size` away.
        if ring as f64 * grid.cell_size() > 2.0 * cell.radius_about(&s) {
            break;
        }
        ring += 1;
    }
    cell
}

fn collect_facets(seeds: &[Point], cells: &[LabeledPolygon<EdgeSource>], tol: f64) -> Vec<Facet> {
    let mut facets = Vec::new();
    let mut dropped = 0usize;
    for (i, cell) in cells.iter().enumerate() {
        let n = cell.len();
        for e in 0..n {
            let EdgeSource::Seed(j) = cell.labels[e] else { continue };
            if j < i {
                continue;
            }
            let a = cell.vertices[e];
            let b = cell.vertices[(e + 1) % n];
            let length = (b - a).norm();
            if length <= tol {
                dropped += 1;
                continue;
            }
            facets.push(Facet {
                seeds: [i, j],
                endpoints: [a, b],
                midpoint: nalgebra::center(&a, &b),
                length,
                normal: (seeds[j] - seeds[i]).normalize(),
            });
        }
    }
    if dropped > 0 {
        log::debug!("dropped {dropped} zero-length Voronoi facets");
    }
    facets.sort_by_key(|f| f.seeds);
    facets
}
