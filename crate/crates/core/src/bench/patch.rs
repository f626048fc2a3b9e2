//! Displacement patch test: the affine field `u = 1 + x + y`,
//! `v = 2 − 3x − 4y` is imposed on the boundary of the unit square and must
//! be reproduced inside.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::norms::{lattice_l2_error, vem_l2_error};
use super::ErrorReport;
use crate::materials::{AnalysisMode, MaterialPhase, PhaseTable};
use crate::mesh::{generate_mesh, DomainSpec, GeneratedMesh, MeshOptions, PolygonalMesh, INCLUSION_PHASE, MATRIX_PHASE};
use crate::system::{solve_lattice, solve_vem, BoundarySpec, LatticeAnalysis, SolverOptions, VemAnalysis};
use crate::vclm::{calibrate_springs, LatticeModel, SpringCalibration};
use crate::{Error, Point, Result, Vec2};

pub fn patch_field(p: &Point) -> Vec2 {
    Vec2::new(1.0 + p.x + p.y, 2.0 - 3.0 * p.x - 4.0 * p.y)
}

/// Voigt strain of [`patch_field`].
pub fn patch_strain() -> Vector3<f64> {
    Vector3::new(1.0, -4.0, -2.0)
}

/// Infinitesimal rotation `(∂v/∂x − ∂u/∂y) / 2` of [`patch_field`].
pub fn patch_rotation() -> f64 {
    -2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PatchMesh {
    /// Generated Voronoi mesh, spacing 0.25.
    Coarse,
    /// Generated Voronoi mesh, spacing 0.1.
    Fine,
    /// Two hand-built elements: a non-convex heptagon inside a square with a
    /// heptagonal hole.
    Inclusion,
}

impl PatchMesh {
    pub fn name(self) -> &'static str {
        match self {
            Self::Coarse => "coarse",
            Self::Fine => "fine",
            Self::Inclusion => "inclusion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PatchModel {
    Vem,
    /// Springs calibrated to `(E, ν)`.
    VclmCalibrated,
    /// `k_t = k_n`.
    VclmEqualSprings,
}

impl PatchModel {
    pub fn label(self) -> &'static str {
        match self {
            Self::Vem => "VEM",
            Self::VclmCalibrated => "VCLM (calibrated)",
            Self::VclmEqualSprings => "VCLM (k_t = k_n)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchConfig {
    pub young: f64,
    pub poisson: f64,
    /// Multiplier on the imposed field.
    pub amplitude: f64,
    pub rng_seed: u64,
    pub coarse_spacing: f64,
    pub fine_spacing: f64,
    pub solver: SolverOptions,
}

impl Default for PatchConfig {
    fn default() -> Self {
        Self { young: 1.0, poisson: 0.3, amplitude: 1.0, rng_seed: 1, coarse_spacing: 0.25, fine_spacing: 0.1, solver: SolverOptions::default() }
    }
}

/// Unit square split into a non-convex heptagon (phase 1) and the
/// surrounding square with a heptagonal hole (phase 2). Nodes 0–3 are the
/// square's corners, nodes 4–10 the heptagon.
pub fn fig3c_mesh() -> PolygonalMesh {
    let nodes: Vec<Point> = [
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, 1.0),
        (0.32, 0.28),
        (0.61, 0.22),
        (0.74, 0.47),
        (0.52, 0.50),
        (0.66, 0.74),
        (0.37, 0.70),
        (0.25, 0.49),
    ]
    .iter()
    .map(|&(x, y)| Point::new(x, y))
    .collect();
    let heptagon: Vec<usize> = (4..11).collect();
    let hole: Vec<usize> = heptagon.iter().rev().copied().collect();
    let mut mesh =
        PolygonalMesh::new(nodes, vec![(vec![heptagon], INCLUSION_PHASE), (vec![vec![0, 1, 2, 3], hole], MATRIX_PHASE)])
            .expect("hand-built mesh is valid");
    mesh.tag_nodes("outer", |i, _| i < 4);
    mesh
}

/// A patch-test mesh, with the generating tessellation when there is one.
pub fn patch_test_mesh(kind: PatchMesh, config: &PatchConfig) -> Result<(PolygonalMesh, Option<GeneratedMesh>)> {
    let spacing = match kind {
        PatchMesh::Coarse => config.coarse_spacing,
        PatchMesh::Fine => config.fine_spacing,
        PatchMesh::Inclusion => return Ok((fig3c_mesh(), None)),
    };
    let g = generate_mesh(&DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]), MeshOptions::new(spacing, config.rng_seed))?;
    Ok((g.mesh.clone(), Some(g)))
}

#[derive(Debug, Clone)]
pub struct PatchResult {
    pub report: ErrorReport,
    pub mesh: PolygonalMesh,
    pub vem: Option<VemAnalysis>,
    pub lattice: Option<(LatticeModel, LatticeAnalysis)>,
    /// Stress the model should reproduce (`C ε` for VEM and the calibrated
    /// lattice, the `ν = 0` stress for equal springs).
    pub expected_stress: Vector3<f64>,
}

pub fn run_patch_test(kind: PatchMesh, model: PatchModel, config: &PatchConfig) -> Result<PatchResult> {
    let (mesh, generated) = patch_test_mesh(kind, config)?;
    let phase = MaterialPhase::new(config.young, config.poisson, AnalysisMode::PlaneStress)?;
    let field = |p: &Point| patch_field(p) * config.amplitude;
    let strain = patch_strain() * config.amplitude;
    match model {
        PatchModel::Vem => {
            let phases = PhaseTable::from([(INCLUSION_PHASE, phase), (MATRIX_PHASE, phase)]);
            let mut spec = BoundarySpec::default();
            let boundary = mesh.boundary_nodes();
            spec.prescribe_field(boundary.iter().map(|&n| (n, &mesh.nodes[n])), field);
            let analysis = solve_vem(&mesh, &phases, &spec, config.solver)?;
            let l2 = vem_l2_error(&mesh, &analysis, |x, _| Ok(field(x)))?;
            let expected = phase.constitutive_matrix()? * strain;
            let stress_error = analysis.stresses.iter().map(|s| (s.stress - expected).norm() / expected.norm()).fold(0.0, f64::max);
            let report = ErrorReport::new(
                model.label(),
                kind.name(),
                mesh.elements.len(),
                analysis.assembly.system.num_dofs(),
                l2,
                Some(stress_error),
                analysis.equilibrium.relative_imbalance(),
            );
            Ok(PatchResult { report, mesh, vem: Some(analysis), lattice: None, expected_stress: expected })
        }
        PatchModel::VclmCalibrated | PatchModel::VclmEqualSprings => {
            let generated = generated
                .ok_or_else(|| Error::Config("the lattice model needs a Voronoi tessellation; use a generated mesh".into()))?;
            let calibration = if model == PatchModel::VclmEqualSprings {
                SpringCalibration::equal_springs(config.young)
            } else {
                calibrate_springs(config.young, config.poisson)?
            };
            let mut lattice = generated.lattice();
            let calibrations: BTreeMap<u32, SpringCalibration> =
                lattice.nodes.iter().map(|n| (n.phase, calibration)).collect();
            lattice.assign_springs(&calibrations, 1.0)?;
            let mut spec = BoundarySpec::default();
            spec.prescribe_field(
                lattice.nodes.iter().enumerate().filter(|(_, n)| n.on_boundary).map(|(k, n)| (k, &n.position)),
                field,
            );
            // the rigid cells on the boundary follow the field's rotation too;
            // left free, they lack the moment of the missing boundary facets
            for (k, _) in lattice.nodes.iter().enumerate().filter(|(_, n)| n.on_boundary) {
                spec.prescribe(k, 2, patch_rotation() * config.amplitude);
            }
            let analysis = solve_lattice(&lattice, &spec, config.solver)?;
            let l2 = lattice_l2_error(&lattice, &analysis, |x, _| Ok(field(x)))?;
            let represented = MaterialPhase::new(calibration.young(), calibration.poisson(), AnalysisMode::PlaneStress)?;
            let expected = represented.constitutive_matrix()? * strain;
            // cells on the boundary miss the forces of the constraints
            let stress_error = lattice
                .nodes
                .iter()
                .zip(&analysis.stresses)
                .filter(|(n, _)| !n.on_boundary)
                .map(|(_, s)| (s.voigt - expected).norm() / expected.norm())
                .fold(0.0, f64::max);
            let report = ErrorReport::new(
                model.label(),
                kind.name(),
                lattice.nodes.len(),
                analysis.system.num_dofs(),
                l2,
                Some(stress_error),
                analysis.equilibrium.relative_imbalance(),
            );
            Ok(PatchResult { report, mesh, vem: None, lattice: Some((lattice, analysis)), expected_stress: expected })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::polygon_geometry;

    #[test]
    fn fig3c_mesh_shape() {
        let m = fig3c_mesh();
        assert_eq!(m.elements.len(), 2);
        assert!((m.area() - 1.0).abs() < 1e-15);
        let inner = &m.elements[0];
        assert_eq!(inner.num_vertices(), 7);
        let ring: Vec<Point> = inner.loops[0].iter().map(|&i| m.nodes[i]).collect();
        // non-convex: some turn is clockwise
        let turns = (0..7).map(|k| (ring[(k + 1) % 7] - ring[k]).perp(&(ring[(k + 2) % 7] - ring[(k + 1) % 7])));
        assert!(turns.clone().any(|t| t < 0.0) && turns.clone().any(|t| t > 0.0));
        let outer = &m.elements[1];
        assert_eq!(outer.loops.len(), 2);
        assert_eq!(outer.loops[1].len(), 7);
        let hole: Vec<Point> = outer.loops[1].iter().map(|&i| m.nodes[i]).collect();
        assert!(crate::mesh::geometry::signed_area(&hole) < 0.0);
        let g = polygon_geometry(&m.element_coords(1)).unwrap();
        assert!((g.area + inner.geometry.area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vem_patch_is_exact_on_every_mesh() {
        for kind in [PatchMesh::Coarse, PatchMesh::Inclusion] {
            let r = run_patch_test(kind, PatchModel::Vem, &PatchConfig::default()).unwrap().report;
            assert!(r.relative_l2 <= 1e-12, "{kind:?}: {}", r.relative_l2);
            assert!(r.stress_error.unwrap() <= 1e-10);
        }
    }

    #[test]
    fn equal_spring_lattice_is_exact_with_zero_poisson_stress() {
        let r = run_patch_test(PatchMesh::Coarse, PatchModel::VclmEqualSprings, &PatchConfig::default()).unwrap();
        assert!(r.report.relative_l2 <= 1e-12, "{:?}", r.report);
        assert!(r.report.stress_error.unwrap() <= 1e-8);
        // ν = 0 stress E (εxx, εyy, γ/2)
        assert_eq!(r.expected_stress, Vector3::new(1.0, -4.0, -1.0));
    }

    #[test]
    fn errors_scale_linearly_with_amplitude() {
        let base = run_patch_test(PatchMesh::Coarse, PatchModel::VclmCalibrated, &PatchConfig::default()).unwrap().report;
        let scaled =
            run_patch_test(PatchMesh::Coarse, PatchModel::VclmCalibrated, &PatchConfig { amplitude: 3.5, ..Default::default() })
                .unwrap()
                .report;
        assert!((scaled.absolute_l2 - 3.5 * base.absolute_l2).abs() <= 1e-10 * scaled.absolute_l2);
        assert!((scaled.relative_l2 - base.relative_l2).abs() <= 1e-10 * base.relative_l2);
    }

    #[test]
    fn lattice_on_hand_built_mesh_is_rejected() {
        assert!(matches!(
            run_patch_test(PatchMesh::Inclusion, PatchModel::VclmCalibrated, &PatchConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
