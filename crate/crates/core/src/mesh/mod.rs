//! Polygonal meshes and their generation from clipped Voronoi tessellations.

pub mod domain;
mod generate;
pub mod geometry;
pub mod io;
mod lattice;
pub mod seeds;
pub mod voronoi;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use domain::{circle_segments, DomainSpec, Inclusion, InclusionShape, InterfaceCurve, OuterShape, INCLUSION_PHASE, MATRIX_PHASE};
pub use generate::{generate_mesh, GeneratedMesh, MeshOptions};
pub use geometry::{polygon_geometry, PolygonGeometry};
pub use lattice::{extract_lattice, extract_lattice_masked};
pub use seeds::{generate_seeds, interface_pairs, mirror_seeds_across_interface, InterfacePair};
pub use voronoi::{clipped_voronoi, EdgeSource, Facet, VoronoiTessellation};

use crate::{Error, Point, Result};

/// Polygonal element: the first loop is the counter-clockwise outer boundary,
/// further loops are clockwise holes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyElement {
    pub loops: Vec<Vec<usize>>,
    pub phase: u32,
    pub geometry: PolygonGeometry,
}

impl PolyElement {
    /// Vertex indices in DOF order (all loops concatenated).
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.loops.iter().flatten().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    /// Directed boundary edges of every loop.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.loops.iter().flat_map(|l| (0..l.len()).map(move |k| (l[k], l[(k + 1) % l.len()])))
    }

    pub fn is_simple(&self) -> bool {
        self.loops.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonalMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<PolyElement>,
    /// Named boundary groups of node indices.
    pub node_tags: BTreeMap<String, BTreeSet<usize>>,
}

impl PolygonalMesh {
    /// Builds a mesh from element loops and phase labels, validating indices
    /// and ring orientation.
    pub fn new(nodes: Vec<Point>, elements: Vec<(Vec<Vec<usize>>, u32)>) -> Result<Self> {
        let count = nodes.len();
        let elements = elements
            .into_iter()
            .enumerate()
            .map(|(e, (loops, phase))| {
                for &node in loops.iter().flatten() {
                    if node >= count {
                        return Err(Error::InvalidNodeIndex { element: e, node, count });
                    }
                }
                make_element(&nodes, loops, phase)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, elements, node_tags: BTreeMap::new() })
    }

    pub fn element_coords(&self, e: usize) -> Vec<Vec<Point>> {
        self.elements[e].loops.iter().map(|l| l.iter().map(|&i| self.nodes[i]).collect()).collect()
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.geometry.area).sum()
    }

    pub fn bounding_diameter(&self) -> f64 {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &self.nodes {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (hi - lo).norm()
    }

    /// Directed edges that belong to exactly one element, with that element.
    pub fn boundary_edges(&self) -> Vec<(usize, usize, usize)> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for el in &self.elements {
            for (a, b) in el.edges() {
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for (a, b) in el.edges() {
                if count[&(a.min(b), a.max(b))] == 1 {
                    out.push((a, b, e));
                }
            }
        }
        out
    }

    /// Nodes on the mesh boundary (outer boundary and internal voids).
    pub fn boundary_nodes(&self) -> BTreeSet<usize> {
        self.boundary_edges().into_iter().flat_map(|(a, b, _)| [a, b]).collect()
    }

    pub fn tagged(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.node_tags.get(name)
    }

    pub fn tag_nodes(&mut self, name: &str, pred: impl Fn(usize, &Point) -> bool) {
        let set: BTreeSet<usize> = self.nodes.iter().enumerate().filter(|(i, p)| pred(*i, p)).map(|(i, _)| i).collect();
        self.node_tags.entry(name.to_string()).or_default().extend(set);
    }

    /// Tags nodes within `1e-8 × diameter` of the segment `[a, b]`.
    pub fn tag_segment(&mut self, name: &str, a: Point, b: Point) {
        let tol = 1e-8 * self.bounding_diameter();
        self.tag_nodes(name, |_, p| geometry::segment_distance(p, &a, &b) <= tol);
    }

    /// Replaces all elements of `phase` by their union; each connected part
    /// becomes one (possibly multiply connected) element. Nodes no longer
    /// referenced are removed.
    pub fn merge_phase(&self, phase: u32) -> Result<Self> {
        let members: Vec<usize> = (0..self.elements.len()).filter(|&e| self.elements[e].phase == phase).collect();
        if members.is_empty() {
            return Ok(self.clone());
        }
        let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &e in &members {
            directed.extend(self.elements[e].edges());
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &directed {
            if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
                return Err(Error::InvalidDomain(format!("phase {phase} region is pinched at node {a}")));
            }
        }
        let mut loops: Vec<Vec<usize>> = Vec::new();
        while let Some((&start, _)) = next.iter().next() {
            let mut ring = vec![start];
            let mut cur = next.remove(&start).unwrap();
            while cur != start {
                ring.push(cur);
                cur = next
                    .remove(&cur)
                    .ok_or_else(|| Error::InvalidDomain(format!("open boundary while merging phase {phase}")))?;
            }
            loops.push(ring);
        }
        let coords = |l: &Vec<usize>| l.iter().map(|&i| self.nodes[i]).collect::<Vec<_>>();
        let (outers, holes): (Vec<_>, Vec<_>) =
            loops.into_iter().partition(|l| geometry::signed_area(&coords(l)) > 0.0);
        let mut merged: Vec<Vec<Vec<usize>>> = outers.into_iter().map(|o| vec![o]).collect();
        for h in holes {
            let probe = self.nodes[h[0]];
            // The hole belongs to the smallest outer ring containing it.
            let owner = merged
                .iter()
                .enumerate()
                .filter(|(_, m)| geometry::point_in_rings(&probe, &[coords(&m[0])]))
                .min_by(|a, b| {
                    geometry::signed_area(&coords(&a.1[0])).total_cmp(&geometry::signed_area(&coords(&b.1[0])))
                })
                .map(|(k, _)| k)
                .ok_or_else(|| Error::InvalidDomain("hole without enclosing ring".into()))?;
            merged[owner].push(h);
        }
        let mut elements: Vec<(Vec<Vec<usize>>, u32)> = self
            .elements
            .iter()
            .filter(|e| e.phase != phase)
            .map(|e| (e.loops.clone(), e.phase))
            .collect();
        elements.extend(merged.into_iter().map(|l| (l, phase)));
        let mut out = PolygonalMesh::new(self.nodes.clone(), elements)?;
        out.node_tags = self.node_tags.clone();
        Ok(out.compact())
    }

    /// Keeps only the elements in `keep` (in order) and drops unused nodes.
    pub fn retain_elements(&self, keep: &[usize]) -> Self {
        let elements = keep.iter().map(|&e| self.elements[e].clone()).collect();
        Self { nodes: self.nodes.clone(), elements, node_tags: self.node_tags.clone() }.compact()
    }

    /// Connected components of elements sharing an edge.
    pub fn element_components(&self) -> Vec<Vec<usize>> {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for (a, b) in el.edges() {
                by_edge.entry((a.min(b), a.max(b))).or_default().push(e);
            }
        }
        let mut comp = vec![usize::MAX; self.elements.len()];
        let mut out = Vec::new();
        for start in 0..self.elements.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut k = 0;
            while k < members.len() {
                let e = members[k];
                k += 1;
                for (a, b) in self.elements[e].edges() {
                    for &f in &by_edge[&(a.min(b), a.max(b))] {
                        if comp[f] == usize::MAX {
                            comp[f] = id;
                            members.push(f);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Removes nodes not referenced by any element, renumbering the rest in
    /// their original order.
    pub fn compact(self) -> Self {
        let mut used = vec![false; self.nodes.len()];
        for &n in self.elements.iter().flat_map(|e| e.loops.iter().flatten()) {
            used[n] = true;
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, p) in self.nodes.iter().enumerate() {
            if used[i] {
                map[i] = nodes.len();
                nodes.push(*p);
            }
        }
        let elements = self
            .elements
            .into_iter()
            .map(|mut e| {
                for l in &mut e.loops {
                    for n in l.iter_mut() {
                        *n = map[*n];
                    }
                }
                e
            })
            .collect();
        let node_tags = self
            .node_tags
            .into_iter()
            .map(|(k, set)| (k, set.into_iter().filter(|&i| used[i]).map(|i| map[i]).collect()))
            .collect();
        Self { nodes, elements, node_tags }
    }
}

fn make_element(nodes: &[Point], loops: Vec<Vec<usize>>, phase: u32) -> Result<PolyElement> {
    let coords: Vec<Vec<Point>> = loops.iter().map(|l| l.iter().map(|&i| nodes[i]).collect()).collect();
    for (ring, c) in coords.iter().enumerate().skip(1) {
        if c.len() >= 3 && geometry::signed_area(c) >= 0.0 {
            return Err(Error::InvalidDomain(format!("hole ring {ring} must be clockwise")));
        }
    }
    let geometry = polygon_geometry(&coords)?;
    Ok(PolyElement { loops, phase, geometry })
}

/// Converts Voronoi cells into polygonal elements. Voronoi vertices closer
/// than `1e-9 × domain diameter` are merged into one node. `classify` maps a
/// cell (by seed index and seed point) to its phase, or `None` to omit it.
/// Returns the mesh and, per element, the originating cell.
pub fn tessellation_to_mesh(
    tess: &VoronoiTessellation,
    classify: impl Fn(usize, &Point) -> Option<u32>,
) -> Result<(PolygonalMesh, Vec<usize>)> {
    let tol = tess.merge_tolerance();
    let mut nodes: Vec<Point> = Vec::new();
    let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &Point| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut node_of = |p: &Point, nodes: &mut Vec<Point>| -> usize {
        let (kx, ky) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = lookup.get(&(kx + dx, ky + dy)) {
                    if let Some(&id) = ids.iter().find(|&&id| (nodes[id] - p).norm() <= tol) {
                        return id;
                    }
                }
            }
        }
        let id = nodes.len();
        nodes.push(*p);
        lookup.entry((kx, ky)).or_default().push(id);
        id
    };

    let mut elements = Vec::new();
    let mut cells = Vec::new();
    for (k, cell) in tess.cells.iter().enumerate() {
        let Some(phase) = classify(k, &tess.seeds[k]) else { continue };
        let mut ring: Vec<usize> = Vec::with_capacity(cell.len());
        for v in &cell.vertices {
            let id = node_of(v, &mut nodes);
            if ring.last() != Some(&id) {
                ring.push(id);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        elements.push((vec![ring], phase));
        cells.push(k);
    }
    let mut mesh = PolygonalMesh::new(nodes, elements)?;
    tag_domain_boundary(&mut mesh, &tess.domain, None);
    Ok((mesh.compact(), cells))
}

/// Tags nodes on the domain polygon edges as `"outer"` and, if names are
/// given, by edge name.
pub(crate) fn tag_domain_boundary(mesh: &mut PolygonalMesh, domain: &[Point], names: Option<&[Option<&str>]>) {
    let n = domain.len();
    for k in 0..n {
        let (a, b) = (domain[k], domain[(k + 1) % n]);
        mesh.tag_segment("outer", a, b);
        if let Some(Some(name)) = names.and_then(|ns| ns.get(k)) {
            mesh.tag_segment(name, a, b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quadrants() -> VoronoiTessellation {
        let seeds: Vec<Point> =
            [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)].iter().map(|&(x, y)| Point::new(x, y)).collect();
        clipped_voronoi(&seeds, &DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]).outer_polygon(1.0)).unwrap()
    }

    #[test]
    fn quadrant_mesh_counts() {
        let tess = quadrants();
        let (mesh, cells) = tessellation_to_mesh(&tess, |_, _| Some(1)).unwrap();
        assert_eq!(mesh.nodes.len(), 9);
        assert_eq!(mesh.elements.len(), 4);
        assert_eq!(cells, vec![0, 1, 2, 3]);
        assert!(mesh.elements.iter().all(|e| e.num_vertices() == 4));
        assert_relative_eq!(mesh.area(), 1.0, epsilon = 1e-14);
        assert_eq!(mesh.tagged("outer").unwrap().len(), 8);
        // naive count: every cell vertex listed separately
        let naive: usize = tess.cells.iter().map(|c| c.len()).sum();
        assert_eq!(naive, 16);
    }

    #[test]
    fn merge_quadrants_into_one() {
        let (mesh, _) = tessellation_to_mesh(&quadrants(), |_, _| Some(1)).unwrap();
        let merged = mesh.merge_phase(1).unwrap();
        assert_eq!(merged.elements.len(), 1);
        assert_eq!(merged.nodes.len(), 8);
        assert_relative_eq!(merged.area(), 1.0, epsilon = 1e-14);
        assert_eq!(merged.elements[0].num_vertices(), 8);
    }

    #[test]
    fn merging_a_ring_creates_a_hole() {
        // 3x3 grid of unit squares; merge the outer eight.
        let mut nodes = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                nodes.push(Point::new(i as f64, j as f64));
            }
        }
        let id = |i: usize, j: usize| j * 4 + i;
        let mut elements = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                let phase = if i == 1 && j == 1 { 1 } else { 2 };
                elements.push((vec![vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]], phase));
            }
        }
        let mesh = PolygonalMesh::new(nodes, elements).unwrap();
        let merged = mesh.merge_phase(2).unwrap();
        assert_eq!(merged.elements.len(), 2);
        let ring = merged.elements.iter().find(|e| e.phase == 2).unwrap();
        assert_eq!(ring.loops.len(), 2);
        assert_relative_eq!(ring.geometry.area, 8.0, epsilon = 1e-14);
        assert_relative_eq!(ring.geometry.centroid, Point::new(1.5, 1.5), epsilon = 1e-14);
        assert_eq!(merged.element_components().len(), 1);
    }

    #[test]
    fn invalid_index() {
        let r = PolygonalMesh::new(vec![Point::new(0.0, 0.0)], vec![(vec![vec![0, 1, 2]], 1)]);
        assert!(matches!(r, Err(Error::InvalidNodeIndex { node: 1, .. })));
    }
}
