//! End-to-end generation of interface-conforming Voronoi meshes.

use super::domain::DomainSpec;
use super::geometry::segment_distance;
use super::seeds::{chord_clearance, generate_seeds, inside_convex, interface_pairs, BucketGrid, MIN_SEPARATION};
use super::voronoi::{clipped_voronoi, VoronoiTessellation};
use super::{extract_lattice_masked, tag_domain_boundary, tessellation_to_mesh, PolygonalMesh};
use crate::vclm::LatticeModel;
use crate::{Error, Point, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Target seed spacing; also the maximum interface chord length.
    pub spacing: f64,
    pub rng_seed: u64,
    /// Interface pair offset as a fraction of `spacing`.
    pub offset_ratio: f64,
}

impl MeshOptions {
    pub fn new(spacing: f64, rng_seed: u64) -> Self {
        Self { spacing, rng_seed, offset_ratio: 0.6 }
    }

    pub fn offset(&self) -> f64 {
        self.offset_ratio * self.spacing
    }
}

/// A tessellation together with the VEM mesh and the lattice built on it.
#[derive(Debug, Clone)]
pub struct GeneratedMesh {
    pub domain: DomainSpec,
    pub options: MeshOptions,
    pub tessellation: VoronoiTessellation,
    /// Phase per seed; `None` for void cells and cells cut off from the
    /// main connected component.
    pub seed_phases: Vec<Option<u32>>,
    pub mesh: PolygonalMesh,
    /// Originating Voronoi cell of each mesh element.
    pub element_cells: Vec<usize>,
}

impl GeneratedMesh {
    /// Lattice skeleton over the retained cells (springs unassigned).
    pub fn lattice(&self) -> LatticeModel {
        extract_lattice_masked(&self.tessellation, &self.seed_phases)
    }
}

/// Accepted interface chords and structured seeds, with spatial lookup.
struct Structured {
    chords: Vec<[Point; 2]>,
    chord_grid: BucketGrid,
    seeds: Vec<Point>,
    seed_grid: BucketGrid,
    spacing: f64,
}

impl Structured {
    fn new(lo: Point, hi: Point, spacing: f64) -> Self {
        Self {
            chords: Vec::new(),
            chord_grid: BucketGrid::new(lo, hi, spacing),
            seeds: Vec::new(),
            seed_grid: BucketGrid::new(lo, hi, spacing),
            spacing,
        }
    }

    fn chord_distance(&self, p: &Point, radius: f64) -> f64 {
        let mut near = Vec::new();
        self.chord_grid.near(p, radius + self.spacing, &mut near);
        near.iter().map(|&c| segment_distance(p, &self.chords[c][0], &self.chords[c][1])).fold(f64::INFINITY, f64::min)
    }

    fn seed_distance(&self, p: &Point, radius: f64) -> f64 {
        let mut near = Vec::new();
        self.seed_grid.near(p, radius, &mut near);
        near.iter().map(|&s| (self.seeds[s] - p).norm()).fold(f64::INFINITY, f64::min)
    }

    fn add_chord(&mut self, chord: [Point; 2]) {
        self.chord_grid.insert(&nalgebra::center(&chord[0], &chord[1]), self.chords.len());
        self.chords.push(chord);
    }

    fn add_seed(&mut self, p: Point) {
        self.seed_grid.insert(&p, self.seeds.len());
        self.seeds.push(p);
    }
}

/// Generates seeds (random interior points plus mirrored interface pairs),
/// the clipped Voronoi tessellation, and the polygonal mesh with boundary
/// tags `"outer"` (and `"bottom"`, `"right"`, `"top"`, `"left"` on
/// rectangles). Void cells are omitted and, when voids exist, only the
/// largest connected set of elements is kept.
pub fn generate_mesh(domain: &DomainSpec, options: MeshOptions) -> Result<GeneratedMesh> {
    domain.validate()?;
    let spacing = options.spacing;
    let offset = options.offset();
    if !(offset > 0.0 && offset < spacing) {
        return Err(Error::DegeneratePair { offset, spacing });
    }
    let outer = domain.outer_polygon(spacing);
    let (mut lo, mut hi) = (outer[0], outer[0]);
    for p in &outer {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut st = Structured::new(lo, hi, spacing);
    let min_pair_gap = 0.5 * MIN_SEPARATION * spacing;

    // Curved outer boundaries: one seed per boundary chord so that boundary
    // cells end exactly on the polygon vertices.
    if matches!(domain.outer, super::OuterShape::Circle { .. }) {
        let n = outer.len();
        for k in 0..n {
            let (a, b) = (outer[k], outer[(k + 1) % n]);
            let d = b - a;
            let normal = Vec2::new(d.y, -d.x).normalize();
            st.add_seed(nalgebra::center(&a, &b) - normal * offset);
            st.add_chord([a, b]);
        }
    }

    for curve in domain.interfaces() {
        for pair in interface_pairs(&curve, spacing, offset)? {
            let mid = pair.midpoint();
            if !domain.is_interface_point(&mid, 0.5 * offset, &pair.normal()) {
                continue;
            }
            let ok = [pair.inner, pair.outer].iter().all(|s| {
                inside_convex(s, &outer)
                    && domain.distance_to_outer(s) > 0.5 * offset
                    && st.chord_distance(s, offset) >= 0.9 * offset
                    && st.seed_distance(s, min_pair_gap) >= min_pair_gap
            });
            if !ok {
                continue;
            }
            // existing structured seeds must not sit on the new chord
            let mut near = Vec::new();
            st.seed_grid.near(&mid, spacing + offset, &mut near);
            if near.iter().any(|&s| segment_distance(&st.seeds[s], &pair.chord[0], &pair.chord[1]) < 0.9 * offset) {
                continue;
            }
            st.add_seed(pair.inner);
            st.add_seed(pair.outer);
            st.add_chord(pair.chord);
        }
    }

    let clearance = chord_clearance(spacing, offset);
    let mut seeds: Vec<Point> = generate_seeds(domain, spacing, options.rng_seed)?
        .into_iter()
        .filter(|s| {
            st.chord_distance(s, clearance) >= clearance && st.seed_distance(s, MIN_SEPARATION * spacing) >= MIN_SEPARATION * spacing
        })
        .collect();
    seeds.extend_from_slice(&st.seeds);

    let tessellation = clipped_voronoi(&seeds, &outer)?;
    let mut seed_phases: Vec<Option<u32>> = seeds.iter().map(|s| domain.phase_at(s)).collect();
    let (mut mesh, mut element_cells) = tessellation_to_mesh(&tessellation, |k, _| seed_phases[k])?;

    if domain.has_voids() {
        let components = mesh.element_components();
        let largest = components.iter().max_by_key(|c| c.len()).cloned().unwrap_or_default();
        if largest.len() < mesh.elements.len() {
            log::info!("dropping {} elements disconnected from the main body", mesh.elements.len() - largest.len());
        }
        let kept_cells: Vec<usize> = largest.iter().map(|&e| element_cells[e]).collect();
        let mut keep = vec![false; seeds.len()];
        for &c in &kept_cells {
            keep[c] = true;
        }
        for (k, p) in seed_phases.iter_mut().enumerate() {
            if !keep[k] {
                *p = None;
            }
        }
        mesh = mesh.retain_elements(&largest);
        element_cells = kept_cells;
    }
    mesh.node_tags.clear();
    tag_domain_boundary(&mut mesh, &outer, Some(&domain.outer_edge_tags(spacing)));

    Ok(GeneratedMesh { domain: domain.clone(), options, tessellation, seed_phases, mesh, element_cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Inclusion, INCLUSION_PHASE};
    use approx::assert_relative_eq;

    #[test]
    fn rectangle_mesh_partitions_domain() {
        let d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]);
        let g = generate_mesh(&d, MeshOptions::new(0.1, 4)).unwrap();
        assert!((g.mesh.area() - 1.0).abs() <= 1e-10);
        assert_eq!(g.mesh.elements.len(), g.tessellation.seeds.len());
        for tag in ["bottom", "right", "top", "left"] {
            assert!(g.mesh.tagged(tag).unwrap().len() >= 2);
        }
        let again = generate_mesh(&d, MeshOptions::new(0.1, 4)).unwrap();
        assert_eq!(g.mesh, again.mesh);
    }

    #[test]
    fn bimaterial_mesh_conforms_to_interface() {
        let (a, b) = (0.25, 1.0);
        let d = DomainSpec::circle([0.0, 0.0], b).with_inclusion(Inclusion::disk([0.0, 0.0], a));
        let opts = MeshOptions::new(0.08, 2);
        let g = generate_mesh(&d, opts).unwrap();
        let polygon_area = super::super::geometry::signed_area(&d.outer_polygon(opts.spacing));
        assert!((g.mesh.area() - polygon_area).abs() <= 1e-10 * polygon_area);
        // every element lies entirely on one side of r = a (up to chord sagitta)
        let sag = opts.offset().powi(2) / (2.0 * a);
        for el in &g.mesh.elements {
            let inside = el.phase == INCLUSION_PHASE;
            for v in el.vertices() {
                let r = g.mesh.nodes[v].coords.norm();
                if inside {
                    assert!(r <= a + 1e-12, "inclusion vertex at r = {r}");
                } else {
                    assert!(r >= a - sag - 1e-12, "matrix vertex at r = {r}");
                }
            }
        }
        // the outer boundary nodes lie on r = b
        for &n in g.mesh.tagged("outer").unwrap() {
            assert_relative_eq!(g.mesh.nodes[n].coords.norm(), b, epsilon = 1e-12);
        }
    }

    #[test]
    fn void_domain_keeps_one_component() {
        let mut d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0])
            .with_inclusion(Inclusion::coated_disk([0.3, 0.3], 0.15, 0.08))
            .with_inclusion(Inclusion::coated_disk([0.7, 0.7], 0.15, 0.08));
        d.boundary_layer = Some(0.08);
        let g = generate_mesh(&d, MeshOptions::new(0.03, 1)).unwrap();
        assert_eq!(g.mesh.element_components().len(), 1);
        assert!(g.mesh.area() < 1.0);
        assert_eq!(g.lattice().nodes.len(), g.mesh.elements.len());
    }
}
