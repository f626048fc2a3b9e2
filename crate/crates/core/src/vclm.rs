//! Voronoi-cell lattice model: rigid cells joined at each shared facet by a
//! zero-size spring set (normal, tangential, rotational) at the facet
//! midpoint.
//!
//! Every lattice node carries three DOFs `(u, v, θ)`.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix3, Matrix6, SMatrix, Vector3, Vector6};

use crate::vem::PrincipalStress;
use crate::{Error, Point, Result, Vec2};

pub const DOFS_PER_NODE: usize = 3;

/// Spring ratio and element-level modulus reproducing a target `(E, ν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringCalibration {
    /// `k_t / k_n`
    pub alpha: f64,
    pub e0: f64,
}

impl SpringCalibration {
    /// `k_n = k_t` with `E₀ = E`; macroscopically this lattice has `ν = 0`.
    pub fn equal_springs(young: f64) -> Self {
        Self { alpha: 1.0, e0: young }
    }

    /// Poisson ratio `(1 - α) / (3 + α)` implied by the spring ratio.
    pub fn poisson(&self) -> f64 {
        (1.0 - self.alpha) / (3.0 + self.alpha)
    }

    /// Young modulus `E₀ (2 + 2α) / (3 + α)` implied by the calibration.
    pub fn young(&self) -> f64 {
        self.e0 * (2.0 + 2.0 * self.alpha) / (3.0 + self.alpha)
    }
}

/// Inverts the lattice relations `ν = (1-α)/(3+α)` and `E = E₀(2+2α)/(3+α)`.
pub fn calibrate_springs(young: f64, poisson: f64) -> Result<SpringCalibration> {
    if !(0.0..1.0 / 3.0).contains(&poisson) {
        return Err(Error::CalibrationRange(poisson));
    }
    let alpha = (1.0 - 3.0 * poisson) / (1.0 + poisson);
    let e0 = young * (3.0 + alpha) / (2.0 + 2.0 * alpha);
    Ok(SpringCalibration { alpha, e0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Springs {
    pub kn: f64,
    pub kt: f64,
    pub kphi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeNode {
    /// Generator point.
    pub position: Point,
    pub phase: u32,
    /// Voronoi cell, counter-clockwise.
    pub cell: Vec<Point>,
    /// Cell area times unit thickness.
    pub volume: f64,
    /// Index of the originating seed in the tessellation.
    pub seed: usize,
    /// Whether the cell touches the domain boundary.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeElement {
    pub nodes: [usize; 2],
    pub facet_length: f64,
    pub midpoint: Point,
    /// Unit normal from node `i` toward node `j`.
    pub normal: Vec2,
    /// `normal` rotated by +90°.
    pub tangent: Vec2,
    pub distance: f64,
    pub springs: Springs,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeModel {
    pub nodes: Vec<LatticeNode>,
    pub elements: Vec<LatticeElement>,
}

/// `θ × r` for an in-plane rotation.
fn rot(r: &Vec2) -> Vec2 {
    Vec2::new(-r.y, r.x)
}

impl LatticeElement {
    /// Geometry-only element; springs are set by [`assign_spring_stiffness`].
    pub fn new(nodes: [usize; 2], positions: [Point; 2], facet: [Point; 2]) -> Self {
        let d = positions[1] - positions[0];
        let distance = d.norm();
        let normal = d / distance;
        Self {
            nodes,
            facet_length: (facet[1] - facet[0]).norm(),
            midpoint: nalgebra::center(&facet[0], &facet[1]),
            normal,
            tangent: rot(&normal),
            distance,
            springs: Springs::default(),
        }
    }

    /// Maps `(u_i, v_i, θ_i, u_j, v_j, θ_j)` to the spring-set deformations
    /// `(δn, δt, δφ)` under rigid-cell kinematics, given node positions.
    pub fn kinematics(&self, xi: &Point, xj: &Point) -> SMatrix<f64, 3, 6> {
        let (n, t) = (self.normal, self.tangent);
        let ri = rot(&(self.midpoint - xi));
        let rj = rot(&(self.midpoint - xj));
        SMatrix::<f64, 3, 6>::from_row_slice(&[
            -n.x, -n.y, -n.dot(&ri), n.x, n.y, n.dot(&rj),
            -t.x, -t.y, -t.dot(&ri), t.x, t.y, t.dot(&rj),
            0.0, 0.0, -1.0, 0.0, 0.0, 1.0,
        ])
    }

    pub fn spring_diagonal(&self) -> Vector3<f64> {
        Vector3::new(self.springs.kn, self.springs.kt, self.springs.kphi)
    }
}

/// `Bᵀ diag(k_n, k_t, k_φ) B` in DOF order `(u_i, v_i, θ_i, u_j, v_j, θ_j)`.
pub fn lattice_element_stiffness(el: &LatticeElement, xi: &Point, xj: &Point) -> Matrix6<f64> {
    let b = el.kinematics(xi, xj);
    b.transpose() * Matrix3::from_diagonal(&el.spring_diagonal()) * b
}

/// Sets `k_n = E₀ t h_f / d`, `k_t = α k_n`, `k_φ = k_n h_f² / 12`. For an
/// element joining two phases the normal and tangential stiffnesses are the
/// harmonic means of the two sides (two half-springs in series).
pub fn assign_spring_stiffness(
    el: &LatticeElement,
    side_i: &SpringCalibration,
    side_j: &SpringCalibration,
    thickness: f64,
) -> Result<LatticeElement> {
    if !(el.distance > 0.0) {
        return Err(Error::DegenerateLatticeElement(el.nodes[0], el.nodes[1]));
    }
    let harmonic = |a: f64, b: f64| if a + b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
    let geometric = thickness * el.facet_length / el.distance;
    let kn = harmonic(side_i.e0, side_j.e0) * geometric;
    let kt = harmonic(side_i.alpha * side_i.e0, side_j.alpha * side_j.e0) * geometric;
    let kphi = kn * el.facet_length * el.facet_length / 12.0;
    let mut out = el.clone();
    out.springs = Springs { kn, kt, kphi };
    Ok(out)
}

/// Volume-averaged stress `(1/V) Σ x_k ⊗ f_k` from forces `f_k` acting on a
/// cell at arms `x_k` relative to the cell node. Entry `(a, b)` is
/// `Σ x_a f_b / V`.
pub fn bardet_stress(volume: f64, arms_and_forces: &[(Vec2, Vec2)]) -> Matrix2<f64> {
    arms_and_forces.iter().fold(Matrix2::zeros(), |acc, (x, f)| acc + x * f.transpose()) / volume
}

/// Averaged stress at a lattice node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalStress {
    /// Possibly asymmetric averaged tensor.
    pub tensor: Matrix2<f64>,
    /// Voigt `(σxx, σyy, τxy)` of the symmetric part.
    pub voigt: Vector3<f64>,
    pub principal: PrincipalStress,
    /// `|σxy - σyx| / 2`.
    pub asymmetry: f64,
}

impl NodalStress {
    fn from_tensor(tensor: Matrix2<f64>) -> Self {
        let txy = 0.5 * (tensor[(0, 1)] + tensor[(1, 0)]);
        let voigt = Vector3::new(tensor[(0, 0)], tensor[(1, 1)], txy);
        Self {
            tensor,
            voigt,
            principal: PrincipalStress::from_voigt(&voigt),
            asymmetry: 0.5 * (tensor[(0, 1)] - tensor[(1, 0)]).abs(),
        }
    }
}

impl LatticeModel {
    pub fn num_dofs(&self) -> usize {
        DOFS_PER_NODE * self.nodes.len()
    }

    /// Assigns spring stiffnesses from per-phase calibrations.
    pub fn assign_springs(&mut self, calibrations: &BTreeMap<u32, SpringCalibration>, thickness: f64) -> Result<()> {
        for k in 0..self.elements.len() {
            let [i, j] = self.elements[k].nodes;
            let ci = calibrations.get(&self.nodes[i].phase).ok_or(Error::UndefinedPhase(self.nodes[i].phase))?;
            let cj = calibrations.get(&self.nodes[j].phase).ok_or(Error::UndefinedPhase(self.nodes[j].phase))?;
            self.elements[k] = assign_spring_stiffness(&self.elements[k], ci, cj, thickness)?;
        }
        Ok(())
    }

    pub fn element_dofs(&self, k: usize) -> [usize; 6] {
        let [i, j] = self.elements[k].nodes;
        [3 * i, 3 * i + 1, 3 * i + 2, 3 * j, 3 * j + 1, 3 * j + 2]
    }

    pub fn element_stiffness(&self, k: usize) -> Matrix6<f64> {
        let el = &self.elements[k];
        lattice_element_stiffness(el, &self.nodes[el.nodes[0]].position, &self.nodes[el.nodes[1]].position)
    }

    /// Spring-set forces `(F_n, F_t, M)` of element `k` for the global DOF
    /// vector `d`.
    pub fn spring_forces(&self, k: usize, d: &[f64]) -> Vector3<f64> {
        let el = &self.elements[k];
        let b = el.kinematics(&self.nodes[el.nodes[0]].position, &self.nodes[el.nodes[1]].position);
        let local = Vector6::from_iterator(self.element_dofs(k).iter().map(|&g| d[g]));
        (b * local).component_mul(&el.spring_diagonal())
    }

    /// Averaged stress at every node from the spring forces on its facets.
    pub fn nodal_stresses(&self, d: &[f64]) -> Vec<NodalStress> {
        let mut contributions: Vec<Vec<(Vec2, Vec2)>> = vec![Vec::new(); self.nodes.len()];
        for (k, el) in self.elements.iter().enumerate() {
            let s = self.spring_forces(k, d);
            // force exerted by the spring set on cell i; cell j gets the opposite
            let f = el.normal * s[0] + el.tangent * s[1];
            let [i, j] = el.nodes;
            contributions[i].push((el.midpoint - self.nodes[i].position, f));
            contributions[j].push((el.midpoint - self.nodes[j].position, -f));
        }
        contributions
            .iter()
            .zip(&self.nodes)
            .map(|(c, n)| NodalStress::from_tensor(bardet_stress(n.volume, c)))
            .collect()
    }

    /// Rigid-body displacement of node `k`'s cell evaluated at `p`.
    pub fn cell_displacement(&self, k: usize, d: &[f64], p: &Point) -> Vec2 {
        let r = p - self.nodes[k].position;
        Vec2::new(d[3 * k], d[3 * k + 1]) + rot(&r) * d[3 * k + 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    fn split_square_element() -> (LatticeElement, Point, Point) {
        let (xi, xj) = (Point::new(0.25, 0.5), Point::new(0.75, 0.5));
        let el = LatticeElement::new([0, 1], [xi, xj], [Point::new(0.5, 0.0), Point::new(0.5, 1.0)]);
        (el, xi, xj)
    }

    #[test]
    fn calibration_values_round_trip() {
        let c = calibrate_springs(2.0, 0.0).unwrap();
        assert_relative_eq!(c.alpha, 1.0);
        assert_relative_eq!(c.e0, 2.0);
        let c = calibrate_springs(1.0, 0.2).unwrap();
        assert_relative_eq!(c.alpha, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.e0, 1.25, epsilon = 1e-15);
        let c = calibrate_springs(1.0, 0.3).unwrap();
        assert_relative_eq!(c.alpha, 1.0 / 13.0, epsilon = 1e-15);
        for &(e, nu) in &[(1.0, 0.2), (1.0, 0.3), (7.5, 0.1), (3.0, 0.0)] {
            let c = calibrate_springs(e, nu).unwrap();
            assert_relative_eq!(c.poisson(), nu, epsilon = 1e-15);
            assert_relative_eq!(c.young(), e, epsilon = 1e-14);
            assert!((0.0..=1.0).contains(&c.alpha));
        }
        assert!(matches!(calibrate_springs(1.0, 1.0 / 3.0), Err(Error::CalibrationRange(_))));
        assert!(matches!(calibrate_springs(1.0, -0.1), Err(Error::CalibrationRange(_))));
    }

    #[test]
    fn spring_magnitudes() {
        let (el, ..) = split_square_element();
        let one = SpringCalibration { alpha: 1.0, e0: 1.0 };
        let s = assign_spring_stiffness(&el, &one, &one, 1.0).unwrap().springs;
        assert_relative_eq!(s.kn, 2.0);
        assert_relative_eq!(s.kt, s.kn);
        assert_relative_eq!(s.kphi, 2.0 / 12.0);
        let stiff = SpringCalibration { alpha: 1.0, e0: 10.0 };
        let s = assign_spring_stiffness(&el, &stiff, &one, 1.0).unwrap().springs;
        assert_relative_eq!(s.kn, 20.0 / 11.0 * 2.0, epsilon = 1e-14);
        let mut bad = el.clone();
        bad.distance = 0.0;
        assert!(assign_spring_stiffness(&bad, &one, &one, 1.0).is_err());
    }

    #[test]
    fn rigid_modes_and_axial_force() {
        let (el, xi, xj) = split_square_element();
        let el = assign_spring_stiffness(&el, &SpringCalibration { alpha: 0.3, e0: 1.0 }, &SpringCalibration { alpha: 0.3, e0: 1.0 }, 1.0).unwrap();
        let k = lattice_element_stiffness(&el, &xi, &xj);
        assert_relative_eq!(k, k.transpose());
        let translation = Vector6::new(0.3, -0.2, 0.0, 0.3, -0.2, 0.0);
        assert!((k * translation).norm() < 1e-15);
        // rotation ω about c: u = ω × (x - c), θ = ω
        let (w, c) = (0.7, Point::new(-1.0, 2.0));
        let ui = rot(&(xi - c)) * w;
        let uj = rot(&(xj - c)) * w;
        let rotation = Vector6::new(ui.x, ui.y, w, uj.x, uj.y, w);
        assert!((k * rotation).norm() < 1e-14);
        let eig = SymmetricEigen::new(k).eigenvalues;
        let tol = 1e-10 * k.diagonal().max();
        assert_eq!(eig.iter().filter(|&&l| l.abs() < tol).count(), 3);
        assert!(eig.min() > -tol);
        // stretch: only the normal spring works, force = k_n δ
        let stretch = Vector6::new(0.0, 0.0, 0.0, 0.01, 0.0, 0.0);
        let f = k * stretch;
        assert_relative_eq!(f[3], el.springs.kn * 0.01, epsilon = 1e-15);
        assert_relative_eq!(f[0], -el.springs.kn * 0.01, epsilon = 1e-15);
    }

    #[test]
    fn bardet_zero_and_uniaxial() {
        assert_eq!(bardet_stress(1.0, &[]), Matrix2::zeros());
        // unit square cell loaded by σxx = 2 on its vertical faces
        let s = bardet_stress(1.0, &[(Vec2::new(0.5, 0.0), Vec2::new(2.0, 0.0)), (Vec2::new(-0.5, 0.0), Vec2::new(-2.0, 0.0))]);
        assert_relative_eq!(s, Matrix2::new(2.0, 0.0, 0.0, 0.0));
    }
}
