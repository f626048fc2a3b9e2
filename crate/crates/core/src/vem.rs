//! First-order virtual elements for plane elasticity.
//!
//! Each element carries the six vectorial scaled monomials
//!
//! ```text
//! m1 = (1, 0)   m2 = (0, 1)   m3 = (-η, ξ)   m4 = (η, ξ)   m5 = (ξ, 0)   m6 = (0, η)
//! ```
//!
//! with `ξ = (x - x_E)/h_E`, `η = (y - y_E)/h_E`. The first three span the
//! rigid-body modes, the last three the constant strains. The energy
//! projection `Π` of the nodal field onto this space is computed from
//! boundary data alone, which is what lets the element be any polygon,
//! including non-convex and multiply connected ones.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::mesh::{polygon_geometry, PolygonGeometry};
use crate::{Error, Point, Result, Vec2};

pub const NUM_MONOMIALS: usize = 6;

/// Monomial basis scaled to one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomialBasis {
    pub centroid: Point,
    pub diameter: f64,
}

impl ScaledMonomialBasis {
    pub fn new(geometry: &PolygonGeometry) -> Self {
        Self { centroid: geometry.centroid, diameter: geometry.diameter }
    }

    /// Scaled coordinates `(ξ, η)`.
    pub fn local(&self, p: &Point) -> (f64, f64) {
        let d = (p - self.centroid) / self.diameter;
        (d.x, d.y)
    }

    /// Values of `m1 … m6` at `p`.
    pub fn eval(&self, p: &Point) -> [Vec2; NUM_MONOMIALS] {
        let (xi, eta) = self.local(p);
        [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-eta, xi),
            Vec2::new(eta, xi),
            Vec2::new(xi, 0.0),
            Vec2::new(0.0, eta),
        ]
    }
}

/// Voigt strains of `m1 … m6` (the first three vanish).
pub fn monomial_strains(basis: &ScaledMonomialBasis) -> [Vector3<f64>; NUM_MONOMIALS] {
    let h = basis.diameter;
    [
        Vector3::zeros(),
        Vector3::zeros(),
        Vector3::zeros(),
        Vector3::new(0.0, 0.0, 2.0 / h),
        Vector3::new(1.0 / h, 0.0, 0.0),
        Vector3::new(0.0, 1.0 / h, 0.0),
    ]
}

/// Voigt stress vector as a symmetric tensor.
pub fn voigt_to_tensor(s: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(s[0], s[2], s[2], s[1])
}

/// Projection data of one element. DOFs are ordered node by node over all
/// loops, `(u_x, u_y)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSystem {
    pub geometry: PolygonGeometry,
    pub basis: ScaledMonomialBasis,
    /// `2N × 6`, `D[i, α] = dof_i(m_α)`.
    pub d: DMatrix<f64>,
    pub g: Matrix6<f64>,
    /// `6 × 2N`.
    pub b: DMatrix<f64>,
    /// `6 × 2N`, `Π = G⁻¹ B̃`: monomial coefficients of the projected field.
    pub pi: DMatrix<f64>,
}

/// Element matrices: projection plus consistency, stabilization and total
/// stiffness (per unit thickness).
#[derive(Debug, Clone, PartialEq)]
pub struct VemElementMatrices {
    pub projection: ProjectionSystem,
    pub g_tilde: Matrix6<f64>,
    pub kc: DMatrix<f64>,
    pub ks: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

/// Builds `D`, `G`, `B̃` and `Π` for the polygon `loops` (outer ring
/// counter-clockwise, holes clockwise) with constitutive matrix `c`.
/// `element` only labels errors.
pub fn projection_system(element: usize, loops: &[Vec<Point>], c: &Matrix3<f64>) -> Result<ProjectionSystem> {
    let geometry = polygon_geometry(loops).map_err(|_| Error::DegenerateElement { element })?;
    let basis = ScaledMonomialBasis::new(&geometry);
    let strains = monomial_strains(&basis);
    let stresses: Vec<Matrix2<f64>> = strains.iter().map(|e| voigt_to_tensor(&(c * e))).collect();
    let points: Vec<Point> = loops.iter().flatten().copied().collect();
    let n = points.len();
    let inv_n = 1.0 / n as f64;

    let mut d = DMatrix::zeros(2 * n, NUM_MONOMIALS);
    for (k, p) in points.iter().enumerate() {
        for (alpha, m) in basis.eval(p).iter().enumerate() {
            d[(2 * k, alpha)] = m.x;
            d[(2 * k + 1, alpha)] = m.y;
        }
    }

    let mut g = Matrix6::zeros();
    for alpha in 0..3 {
        for beta in 0..NUM_MONOMIALS {
            g[(alpha, beta)] = (0..2 * n).map(|i| d[(i, alpha)] * d[(i, beta)]).sum::<f64>() * inv_n;
        }
    }
    for alpha in 3..NUM_MONOMIALS {
        for beta in 3..NUM_MONOMIALS {
            g[(alpha, beta)] = (c * strains[alpha]).dot(&strains[beta]) * geometry.area;
        }
    }

    let mut b = DMatrix::zeros(NUM_MONOMIALS, 2 * n);
    for alpha in 0..3 {
        for i in 0..2 * n {
            b[(alpha, i)] = d[(i, alpha)] * inv_n;
        }
    }
    // ∫_∂E σ(m_α) n · φ_i ds, two-point Gauss–Lobatto per edge
    let mut start = 0;
    for ring in loops {
        let len = ring.len();
        for k in 0..len {
            let (ia, ib) = (start + k, start + (k + 1) % len);
            let e = points[ib] - points[ia];
            // 90° clockwise rotation of the edge vector: |e| times the outward normal
            let scaled_normal = Vec2::new(e.y, -e.x);
            for alpha in 3..NUM_MONOMIALS {
                let t = stresses[alpha] * scaled_normal * 0.5;
                for node in [ia, ib] {
                    b[(alpha, 2 * node)] += t.x;
                    b[(alpha, 2 * node + 1)] += t.y;
                }
            }
        }
        start += len;
    }

    let svd = g.svd(false, false);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-14 * smax) {
        return Err(Error::DegenerateElement { element });
    }
    let cond = smax / smin;
    if cond > 1e8 {
        log::warn!("element {element}: projection matrix condition number {cond:.3e}");
    } else {
        log::trace!("element {element}: projection matrix condition number {cond:.3e}");
    }
    let lu = g.lu();
    let mut pi = DMatrix::zeros(NUM_MONOMIALS, 2 * n);
    for i in 0..2 * n {
        let col = nalgebra::Vector6::from_iterator(b.column(i).iter().copied());
        let x = lu.solve(&col).ok_or(Error::DegenerateElement { element })?;
        pi.set_column(i, &x);
    }
    Ok(ProjectionSystem { geometry, basis, d, g, b, pi })
}

/// Consistency plus diagonal-scaled stabilization stiffness.
pub fn element_stiffness(element: usize, loops: &[Vec<Point>], c: &Matrix3<f64>) -> Result<VemElementMatrices> {
    let projection = projection_system(element, loops, c)?;
    let mut g_tilde = projection.g;
    g_tilde.fixed_rows_mut::<3>(0).fill(0.0);
    let pi = &projection.pi;
    let g_tilde_dyn = DMatrix::from_column_slice(6, 6, g_tilde.as_slice());
    let mut kc = pi.transpose() * g_tilde_dyn * pi;
    symmetrize(&mut kc);
    let ndof = kc.nrows();
    let floor = c.trace() / 3.0;
    let s = DVector::from_iterator(ndof, (0..ndof).map(|i| kc[(i, i)].max(floor)));
    let residual = DMatrix::identity(ndof, ndof) - &projection.d * pi;
    let mut ks = residual.transpose() * DMatrix::from_diagonal(&s) * &residual;
    symmetrize(&mut ks);
    let k = &kc + &ks;
    Ok(VemElementMatrices { projection, g_tilde, kc, ks, k })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Principal values of a symmetric plane stress, `s1 ≥ s2`; `angle` is the
/// direction of `s1` measured from the x axis, in `(-π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalStress {
    pub s1: f64,
    pub s2: f64,
    pub angle: f64,
}

impl PrincipalStress {
    pub fn from_voigt(s: &Vector3<f64>) -> Self {
        let mean = 0.5 * (s[0] + s[1]);
        let half_diff = 0.5 * (s[0] - s[1]);
        let radius = half_diff.hypot(s[2]);
        let angle = if radius == 0.0 { 0.0 } else { 0.5 * s[2].atan2(half_diff) };
        Self { s1: mean + radius, s2: mean - radius, angle }
    }
}

/// Constant stress of the projected field on one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementStress {
    pub strain: Vector3<f64>,
    pub stress: Vector3<f64>,
    pub principal: PrincipalStress,
}

/// Strain and stress of `Π u_E` from the element's nodal displacements.
pub fn element_stress(projection: &ProjectionSystem, c: &Matrix3<f64>, displacements: &[f64]) -> ElementStress {
    let coeffs = &projection.pi * DVector::from_column_slice(displacements);
    let strains = monomial_strains(&projection.basis);
    let strain = (3..NUM_MONOMIALS).fold(Vector3::zeros(), |acc, a| acc + strains[a] * coeffs[a]);
    let stress = c * strain;
    ElementStress { strain, stress, principal: PrincipalStress::from_voigt(&stress) }
}

/// Eigenvalues of a symmetric element matrix, ascending.
pub fn sorted_eigenvalues(k: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(k.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{AnalysisMode, MaterialPhase};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cmat(e: f64, nu: f64) -> Matrix3<f64> {
        MaterialPhase::new(e, nu, AnalysisMode::PlaneStrain).unwrap().constitutive_matrix().unwrap()
    }

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn unit_square() -> Vec<Vec<Point>> {
        vec![pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])]
    }

    /// Non-convex heptagon and a square with a square hole.
    fn awkward_elements() -> Vec<Vec<Vec<Point>>> {
        vec![
            vec![pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.2, 0.4), (1.0, 1.5), (0.3, 1.1), (-0.2, 0.6)])],
            vec![
                pts(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (0.0, 3.0)]),
                pts(&[(1.0, 1.0), (1.0, 2.0), (2.0, 2.0), (2.0, 1.0)]),
            ],
            unit_square(),
            vec![pts(&[(0.1, 0.2), (1.3, -0.1), (0.6, 0.9)])],
        ]
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    fn check_invariants(loops: &[Vec<Point>], c: &Matrix3<f64>) {
        let m = element_stiffness(0, loops, c).unwrap();
        let p = &m.projection;
        let g = DMatrix::from_column_slice(6, 6, p.g.as_slice());
        assert!(max_abs(&(&g * &p.pi - &p.b)) <= 1e-12 * max_abs(&p.b));
        assert!(max_abs(&(&p.pi * &p.d - DMatrix::identity(6, 6))) <= 1e-12);
        assert_eq!(m.k, m.k.transpose());
        let ev = sorted_eigenvalues(&m.k);
        let scale = (0..m.k.nrows()).map(|i| m.k[(i, i)]).fold(0.0, f64::max);
        assert!(ev[0] >= -1e-10 * scale);
        assert_eq!(ev.iter().filter(|&&v| v < 1e-10 * scale).count(), 3, "{ev:?}");
        // stabilization annihilates every affine field
        let affine = &m.ks * &p.d;
        assert!(max_abs(&affine) <= 1e-12 * scale, "{}", max_abs(&affine));
    }

    #[test]
    fn monomial_strain_values() {
        let basis = ScaledMonomialBasis { centroid: Point::new(0.3, -0.2), diameter: 2.0 };
        let s = monomial_strains(&basis);
        assert_eq!(s[2], Vector3::zeros());
        assert_eq!(s[4], Vector3::new(0.5, 0.0, 0.0));
        assert_eq!(s[3], Vector3::new(0.0, 0.0, 1.0));
        // finite-difference oracle on the basis functions themselves
        let p = Point::new(0.7, 0.4);
        let dh = 1e-6;
        for (alpha, strain) in s.iter().enumerate() {
            let dx = (basis.eval(&(p + Vec2::new(dh, 0.0)))[alpha] - basis.eval(&(p - Vec2::new(dh, 0.0)))[alpha]) / (2.0 * dh);
            let dy = (basis.eval(&(p + Vec2::new(0.0, dh)))[alpha] - basis.eval(&(p - Vec2::new(0.0, dh)))[alpha]) / (2.0 * dh);
            let fd = Vector3::new(dx.x, dy.y, dy.x + dx.y);
            assert_relative_eq!(fd, *strain, epsilon = 1e-9);
        }
    }

    #[test]
    fn energy_block_g44() {
        let c = cmat(1.0, 0.25);
        let loops = awkward_elements()[0].clone();
        let p = projection_system(0, &loops, &c).unwrap();
        let h = p.geometry.diameter;
        assert_relative_eq!(p.g[(3, 3)], 4.0 * c[(2, 2)] * p.geometry.area / (h * h), max_relative = 1e-14);
    }

    #[test]
    fn projection_and_stiffness_invariants() {
        for c in [cmat(1.0, 0.25), cmat(210.0, 0.3), cmat(3.0, 0.0)] {
            for loops in awkward_elements() {
                check_invariants(&loops, &c);
            }
        }
    }

    #[test]
    fn rigid_translation_coefficients() {
        let c = cmat(1.0, 0.3);
        for loops in awkward_elements() {
            let p = projection_system(0, &loops, &c).unwrap();
            let n = p.d.nrows() / 2;
            let u = DVector::from_iterator(2 * n, (0..n).flat_map(|_| [0.7, -1.1]));
            let coeff = &p.pi * u;
            assert_relative_eq!(coeff, DVector::from_column_slice(&[0.7, -1.1, 0.0, 0.0, 0.0, 0.0]), epsilon = 1e-13);
        }
    }

    /// Linear-triangle stiffness `A Bᵀ C B`.
    fn cst(tri: &[Point], c: &Matrix3<f64>) -> DMatrix<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = tri.iter().map(|p| (p.x, p.y)).unzip();
        let area2 = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        let mut b = DMatrix::zeros(3, 6);
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let bi = (y[j] - y[k]) / area2;
            let ci = (x[k] - x[j]) / area2;
            b[(0, 2 * i)] = bi;
            b[(1, 2 * i + 1)] = ci;
            b[(2, 2 * i)] = ci;
            b[(2, 2 * i + 1)] = bi;
        }
        let cd = DMatrix::from_column_slice(3, 3, c.as_slice());
        b.transpose() * cd * b * (0.5 * area2)
    }

    #[test]
    fn triangle_consistency_matches_cst() {
        let c = cmat(2.0, 0.3);
        for tri in [pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]), pts(&[(0.1, 0.2), (1.3, -0.1), (0.6, 0.9)])] {
            let m = element_stiffness(0, std::slice::from_ref(&tri), &c).unwrap();
            let oracle = cst(&tri, &c);
            assert!(max_abs(&(&m.kc - &oracle)) <= 1e-12 * max_abs(&oracle));
        }
    }

    /// Solves the orthogonality conditions directly: vertex averages for the
    /// rigid rows, and a fine midpoint sampling of the boundary integral for
    /// the strain rows, followed by a least-squares solve.
    fn brute_force_projection(loops: &[Vec<Point>], c: &Matrix3<f64>) -> DMatrix<f64> {
        let geo = polygon_geometry(loops).unwrap();
        let basis = ScaledMonomialBasis::new(&geo);
        let points: Vec<Point> = loops.iter().flatten().copied().collect();
        let n = points.len();
        let samples = 4000;
        let mut lhs = DMatrix::zeros(6, 6);
        let mut rhs = DMatrix::zeros(6, 2 * n);
        for alpha in 0..3 {
            for beta in 0..6 {
                lhs[(alpha, beta)] = points.iter().map(|p| basis.eval(p)[alpha].dot(&basis.eval(p)[beta])).sum::<f64>() / n as f64;
            }
            for (k, p) in points.iter().enumerate() {
                let m = basis.eval(p)[alpha];
                rhs[(alpha, 2 * k)] = m.x / n as f64;
                rhs[(alpha, 2 * k + 1)] = m.y / n as f64;
            }
        }
        let h = geo.diameter;
        for alpha in 3..6 {
            // strain energy of monomial pairs by central differences of the basis
            let eps = |beta: usize| {
                let q = geo.centroid;
                let dh = 1e-4 * h;
                let dx = (basis.eval(&(q + Vec2::new(dh, 0.0)))[beta] - basis.eval(&(q - Vec2::new(dh, 0.0)))[beta]) / (2.0 * dh);
                let dy = (basis.eval(&(q + Vec2::new(0.0, dh)))[beta] - basis.eval(&(q - Vec2::new(0.0, dh)))[beta]) / (2.0 * dh);
                Vector3::new(dx.x, dy.y, dy.x + dx.y)
            };
            let sig = c * eps(alpha);
            for beta in 0..6 {
                lhs[(alpha, beta)] = sig.dot(&eps(beta)) * geo.area;
            }
            let st = voigt_to_tensor(&sig);
            let mut start = 0;
            for ring in loops {
                for k in 0..ring.len() {
                    let (ia, ib) = (start + k, start + (k + 1) % ring.len());
                    let (a, b) = (points[ia], points[ib]);
                    let len = (b - a).norm();
                    let normal = Vec2::new(b.y - a.y, a.x - b.x) / len;
                    let traction = st * normal;
                    for s in 0..samples {
                        let t = (s as f64 + 0.5) / samples as f64;
                        let w = len / samples as f64;
                        for (node, phi) in [(ia, 1.0 - t), (ib, t)] {
                            rhs[(alpha, 2 * node)] += traction.x * phi * w;
                            rhs[(alpha, 2 * node + 1)] += traction.y * phi * w;
                        }
                    }
                }
                start += ring.len();
            }
        }
        lhs.svd(true, true).solve(&rhs, 1e-14).unwrap()
    }

    #[test]
    fn unit_square_projection_matches_brute_force() {
        let c = cmat(1.0, 0.25);
        let p = projection_system(0, &unit_square(), &c).unwrap();
        let oracle = brute_force_projection(&unit_square(), &c);
        assert!(max_abs(&(&p.pi - &oracle)) <= 1e-6, "{}", max_abs(&(&p.pi - &oracle)));
        let hole = &awkward_elements()[1];
        let p = projection_system(0, hole, &c).unwrap();
        assert!(max_abs(&(&p.pi - &brute_force_projection(hole, &c))) <= 1e-6);
    }

    #[test]
    fn stiffness_is_scale_invariant() {
        let c = cmat(1.0, 0.3);
        for loops in awkward_elements() {
            let k = element_stiffness(0, &loops, &c).unwrap().k;
            for s in [0.1, 10.0] {
                let scaled: Vec<Vec<Point>> = loops.iter().map(|r| r.iter().map(|p| Point::from(p.coords * s)).collect()).collect();
                let ks = element_stiffness(0, &scaled, &c).unwrap().k;
                assert!(max_abs(&(&ks - &k)) <= 1e-12 * max_abs(&k));
            }
        }
    }

    #[test]
    fn stresses_of_affine_and_rigid_fields() {
        let c = cmat(1.0, 0.3);
        for loops in awkward_elements() {
            let p = projection_system(0, &loops, &c).unwrap();
            let pts: Vec<Point> = loops.iter().flatten().copied().collect();
            let patch: Vec<f64> = pts.iter().flat_map(|q| [1.0 + q.x + q.y, 2.0 - 3.0 * q.x - 4.0 * q.y]).collect();
            let s = element_stress(&p, &c, &patch);
            assert_relative_eq!(s.stress, c * Vector3::new(1.0, -4.0, -2.0), epsilon = 1e-12);
            let rot: Vec<f64> = pts.iter().flat_map(|q| [-q.y, q.x]).collect();
            assert!(element_stress(&p, &c, &rot).stress.norm() <= 1e-12);
        }
    }

    #[test]
    fn collinear_vertices_are_degenerate() {
        let c = cmat(1.0, 0.3);
        let line = vec![pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])];
        assert!(matches!(projection_system(7, &line, &c), Err(Error::DegenerateElement { element: 7 })));
    }

    #[test]
    fn principal_stress_values() {
        let p = PrincipalStress::from_voigt(&Vector3::new(1.0, 1.0, 0.0));
        assert_eq!((p.s1, p.s2), (1.0, 1.0));
        let p = PrincipalStress::from_voigt(&Vector3::new(0.0, 0.0, 2.0));
        assert_relative_eq!(p.s1, 2.0);
        assert_relative_eq!(p.s2, -2.0);
        assert_relative_eq!(p.angle, std::f64::consts::FRAC_PI_4);
    }

    proptest! {
        #[test]
        fn principal_stresses_are_tensor_eigenvalues(sx in -1e3f64..1e3, sy in -1e3f64..1e3, t in -1e3f64..1e3) {
            let v = Vector3::new(sx, sy, t);
            let p = PrincipalStress::from_voigt(&v);
            prop_assert!(p.s1 >= p.s2);
            let ev = SymmetricEigen::new(voigt_to_tensor(&v)).eigenvalues;
            let scale = 1.0 + v.amax();
            prop_assert!((p.s1 - ev.max()).abs() <= 1e-12 * scale);
            prop_assert!((p.s2 - ev.min()).abs() <= 1e-12 * scale);
            let dir = Vec2::new(p.angle.cos(), p.angle.sin());
            let r = voigt_to_tensor(&v) * dir - dir * p.s1;
            prop_assert!(r.norm() <= 1e-10 * scale);
        }

        #[test]
        fn random_star_polygons_satisfy_invariants(radii in proptest::collection::vec(0.4f64..1.0, 3..9), nu in 0.0f64..0.45) {
            let n = radii.len();
            let ring: Vec<Point> = radii.iter().enumerate().map(|(k, r)| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Point::new(r * t.cos(), r * t.sin())
            }).collect();
            check_invariants(&[ring], &cmat(1.0, nu));
        }
    }
}
