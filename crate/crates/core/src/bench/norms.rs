//! Discrete L² displacement norms for both discretizations.

use nalgebra::DVector;

use crate::mesh::PolygonalMesh;
use crate::system::{LatticeAnalysis, VemAnalysis};
use crate::vclm::LatticeModel;
use crate::{Point, Result, Vec2};

/// Absolute error norm and the norm of the exact field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Error {
    pub absolute: f64,
    pub reference: f64,
}

impl L2Error {
    pub fn relative(&self) -> f64 {
        if self.reference == 0.0 {
            self.absolute
        } else {
            self.absolute / self.reference
        }
    }
}

/// Barycentric points of the symmetric three-point triangle rule (degree 2).
const RULE: [[f64; 3]; 3] = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];

/// Integrates `f` over a polygon with holes by fanning every ring about
/// `center` with signed triangle areas.
pub fn integrate_polygon(loops: &[Vec<Point>], center: &Point, mut f: impl FnMut(&Point) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for ring in loops {
        for k in 0..ring.len() {
            let (p, q) = (ring[k], ring[(k + 1) % ring.len()]);
            let area = 0.5 * ((p - center).perp(&(q - center)));
            if area == 0.0 {
                continue;
            }
            for w in RULE {
                let x = Point::from(center.coords * w[0] + p.coords * w[1] + q.coords * w[2]);
                total += area / 3.0 * f(&x)?;
            }
        }
    }
    Ok(total)
}

/// `‖Π u_h − u‖` over the mesh, where `Π u_h` is the element-wise projected
/// (linear) field. `exact(x, e)` evaluates the reference field in element `e`.
pub fn vem_l2_error(
    mesh: &PolygonalMesh,
    analysis: &VemAnalysis,
    exact: impl Fn(&Point, usize) -> Result<Vec2>,
) -> Result<L2Error> {
    let (mut err2, mut ref2) = (0.0, 0.0);
    for e in 0..mesh.elements.len() {
        let projection = &analysis.assembly.elements[e].projection;
        let coeffs = &projection.pi * DVector::from_vec(analysis.element_displacements(mesh, e));
        let field = |x: &Point| -> Vec2 { projection.basis.eval(x).iter().zip(coeffs.iter()).map(|(m, c)| m * *c).sum() };
        let loops = mesh.element_coords(e);
        let center = projection.geometry.centroid;
        err2 += integrate_polygon(&loops, &center, |x| Ok((field(x) - exact(x, e)?).norm_squared()))?;
        ref2 += integrate_polygon(&loops, &center, |x| Ok(exact(x, e)?.norm_squared()))?;
    }
    Ok(L2Error { absolute: err2.max(0.0).sqrt(), reference: ref2.max(0.0).sqrt() })
}

/// `√(Σ V_k |u_h(x_k) − u(x_k)|²)` over lattice nodes; `exact(x, k)` is the
/// reference field at node `k`.
pub fn lattice_l2_error(
    model: &LatticeModel,
    analysis: &LatticeAnalysis,
    exact: impl Fn(&Point, usize) -> Result<Vec2>,
) -> Result<L2Error> {
    let displacements: Vec<Vec2> = (0..model.nodes.len())
        .map(|k| {
            let [u, v, _] = analysis.displacement(k);
            Vec2::new(u, v)
        })
        .collect();
    lattice_l2_error_of(model, &displacements, exact)
}

/// Discrete lattice norm for given nodal displacements.
pub fn lattice_l2_error_of(
    model: &LatticeModel,
    displacements: &[Vec2],
    exact: impl Fn(&Point, usize) -> Result<Vec2>,
) -> Result<L2Error> {
    let (mut err2, mut ref2) = (0.0, 0.0);
    for (k, node) in model.nodes.iter().enumerate() {
        let u = exact(&node.position, k)?;
        err2 += node.volume * (displacements[k] - u).norm_squared();
        ref2 += node.volume * u.norm_squared();
    }
    Ok(L2Error { absolute: err2.sqrt(), reference: ref2.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_lattice, clipped_voronoi, generate_seeds, DomainSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn quadrature_integrates_quadratics_over_holed_polygon() {
        // [0,3]² minus [1,2]²: ∫x² = ∫_outer − ∫_hole = 27·3/3 − (8−1)/3·1
        let loops = vec![pts(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (0.0, 3.0)]), pts(&[(1.0, 1.0), (1.0, 2.0), (2.0, 2.0), (2.0, 1.0)])];
        let v = integrate_polygon(&loops, &Point::new(1.5, 1.5), |x| Ok(x.x * x.x)).unwrap();
        assert_relative_eq!(v, 27.0 - 7.0 / 3.0, epsilon = 1e-13);
        let area = integrate_polygon(&loops, &Point::new(1.5, 1.5), |_| Ok(1.0)).unwrap();
        assert_relative_eq!(area, 8.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn fan_centre_does_not_matter(cx in -1.0f64..2.0, cy in -1.0f64..2.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            // non-convex L-shape; fanning from any point gives the same polynomial integral
            let loops = vec![pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])];
            let f = |x: &Point| Ok(a * x.x * x.y + b * x.y * x.y + 1.0);
            let reference = integrate_polygon(&loops, &Point::new(0.5, 0.5), f).unwrap();
            let other = integrate_polygon(&loops, &Point::new(cx, cy), f).unwrap();
            prop_assert!((reference - other).abs() <= 1e-12 * (1.0 + reference.abs()));
        }
    }

    #[test]
    fn exact_nodal_values_have_zero_lattice_error() {
        let d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]);
        let t = clipped_voronoi(&generate_seeds(&d, 0.1, 3).unwrap(), &d.outer_polygon(0.1)).unwrap();
        let model = extract_lattice(&t);
        let field = |p: &Point| Vec2::new(1.0 + p.x + p.y, 2.0 - 3.0 * p.x - 4.0 * p.y);
        let exact: Vec<Vec2> = model.nodes.iter().map(|n| field(&n.position)).collect();
        let e = lattice_l2_error_of(&model, &exact, |x, _| Ok(field(x))).unwrap();
        assert!(e.absolute <= 1e-14);
        assert!(e.reference > 1.0);
    }
}
