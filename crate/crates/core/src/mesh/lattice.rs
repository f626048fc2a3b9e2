use super::voronoi::VoronoiTessellation;
use crate::vclm::{LatticeElement, LatticeModel, LatticeNode};

/// Lattice skeleton dual to the tessellation: one node per seed, one element
/// per interior facet. Springs are left at zero.
pub fn extract_lattice(tess: &VoronoiTessellation) -> LatticeModel {
    extract_lattice_masked(tess, &vec![Some(0); tess.seeds.len()])
}

/// Like [`extract_lattice`], restricted to cells with a phase; `phases[k]`
/// is the phase of seed `k` or `None` to omit its cell.
pub fn extract_lattice_masked(tess: &VoronoiTessellation, phases: &[Option<u32>]) -> LatticeModel {
    let mut node_of = vec![usize::MAX; tess.seeds.len()];
    let mut nodes = Vec::new();
    for (k, phase) in phases.iter().enumerate() {
        let Some(phase) = *phase else { continue };
        node_of[k] = nodes.len();
        nodes.push(LatticeNode {
            position: tess.seeds[k],
            phase,
            cell: tess.cells[k].vertices.clone(),
            volume: tess.cell_area(k),
            seed: k,
            on_boundary: tess.touches_boundary(k),
        });
    }
    let mut elements = Vec::new();
    for f in &tess.facets {
        let [a, b] = f.seeds;
        if node_of[a] == usize::MAX || node_of[b] == usize::MAX {
            continue;
        }
        if f.length <= tess.merge_tolerance() {
            log::warn!("dropping zero-length facet between seeds {a} and {b}");
            continue;
        }
        elements.push(LatticeElement::new([node_of[a], node_of[b]], [tess.seeds[a], tess.seeds[b]], f.endpoints));
    }
    LatticeModel { nodes, elements }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{clipped_voronoi, generate_seeds, DomainSpec};
    use crate::{Point, Vec2};
    use approx::assert_relative_eq;

    fn square() -> Vec<Point> {
        DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]).outer_polygon(1.0)
    }

    #[test]
    fn split_square_lattice() {
        let t = clipped_voronoi(&[Point::new(0.25, 0.5), Point::new(0.75, 0.5)], &square()).unwrap();
        let l = extract_lattice(&t);
        assert_eq!(l.nodes.len(), 2);
        assert_eq!(l.elements.len(), 1);
        let e = &l.elements[0];
        assert_relative_eq!(e.facet_length, 1.0, epsilon = 1e-15);
        assert_relative_eq!(e.distance, 0.5);
        assert_relative_eq!(e.normal, Vec2::new(1.0, 0.0));
        assert_relative_eq!(e.tangent, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn quadrants_have_four_elements() {
        let seeds: Vec<Point> =
            [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)].iter().map(|&(x, y)| Point::new(x, y)).collect();
        let l = extract_lattice(&clipped_voronoi(&seeds, &square()).unwrap());
        assert_eq!(l.elements.len(), 4);
    }

    #[test]
    fn element_count_matches_shared_edges() {
        let seeds = generate_seeds(&DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]), 0.1, 5).unwrap();
        let t = clipped_voronoi(&seeds, &square()).unwrap();
        let l = extract_lattice(&t);
        // oracle: brute-force every pair of cells for a shared edge of positive length
        let tol = 1e-9;
        let mut shared = 0;
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                let ci = &t.cells[i].vertices;
                let cj = &t.cells[j].vertices;
                let common: Vec<&Point> = ci.iter().filter(|p| cj.iter().any(|q| (*p - q).norm() < tol)).collect();
                if common.len() >= 2 && (common[0] - common[common.len() - 1]).norm() > tol {
                    shared += 1;
                }
            }
        }
        assert_eq!(l.elements.len(), shared);
        for e in &l.elements {
            let d = l.nodes[e.nodes[1]].position - l.nodes[e.nodes[0]].position;
            assert!(d.normalize().perp(&e.normal).abs() < 1e-14);
        }
    }
}
