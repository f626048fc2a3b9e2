//! One-call solves for each discretization: assemble, constrain, solve,
//! recover stresses and check equilibrium.

use serde::{Deserialize, Serialize};

use super::{
    apply_dirichlet_and_solve, apply_tractions, assemble_lattice, assemble_vem, equilibrium, reactions, BoundarySpec,
    Equilibrium, GlobalSystem, Reaction, Solution, SolverKind, VemAssembly, DEFAULT_TOLERANCE,
};
use crate::materials::PhaseTable;
use crate::mesh::PolygonalMesh;
use crate::vclm::{LatticeModel, NodalStress};
use crate::vem::{element_stress, ElementStress};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Relative residual target for the iterative solver.
    pub tolerance: f64,
    /// Iteration cap for the iterative solver (default `20 n`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

impl SolverOptions {
    pub fn with_kind(kind: SolverKind) -> Self {
        Self { kind, ..Default::default() }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { kind: SolverKind::Auto, tolerance: DEFAULT_TOLERANCE, max_iterations: None }
    }
}

#[derive(Debug, Clone)]
pub struct VemAnalysis {
    pub assembly: VemAssembly,
    pub solution: Solution,
    pub stresses: Vec<ElementStress>,
    pub reactions: Vec<Reaction>,
    pub equilibrium: Equilibrium,
}

impl VemAnalysis {
    pub fn displacement(&self, node: usize) -> [f64; 2] {
        [self.solution.d[2 * node], self.solution.d[2 * node + 1]]
    }

    pub fn element_displacements(&self, mesh: &PolygonalMesh, e: usize) -> Vec<f64> {
        VemAssembly::element_dofs(mesh, e).iter().map(|&g| self.solution.d[g]).collect()
    }
}

pub fn solve_vem(mesh: &PolygonalMesh, phases: &PhaseTable, spec: &BoundarySpec, options: SolverOptions) -> Result<VemAnalysis> {
    let mut assembly = assemble_vem(mesh, phases)?;
    apply_tractions(&mut assembly.system, spec, mesh)?;
    let solution = apply_dirichlet_and_solve(&assembly.system, spec, options)?;
    let stresses = (0..mesh.elements.len())
        .map(|e| {
            let local: Vec<f64> = VemAssembly::element_dofs(mesh, e).iter().map(|&g| solution.d[g]).collect();
            element_stress(&assembly.elements[e].projection, &assembly.constitutive[e], &local)
        })
        .collect();
    let reactions = reactions(&assembly.system, &solution.d, spec)?;
    let equilibrium = equilibrium(&assembly.system, &reactions);
    Ok(VemAnalysis { assembly, solution, stresses, reactions, equilibrium })
}

#[derive(Debug, Clone)]
pub struct LatticeAnalysis {
    pub system: GlobalSystem,
    pub solution: Solution,
    pub stresses: Vec<NodalStress>,
    pub reactions: Vec<Reaction>,
    pub equilibrium: Equilibrium,
}

impl LatticeAnalysis {
    /// `(u, v, θ)` of a node.
    pub fn displacement(&self, node: usize) -> [f64; 3] {
        let d = &self.solution.d;
        [d[3 * node], d[3 * node + 1], d[3 * node + 2]]
    }
}

/// Solves a lattice whose springs are assigned. Tractions are not
/// supported on lattices; load them through prescribed displacements.
pub fn solve_lattice(model: &LatticeModel, spec: &BoundarySpec, options: SolverOptions) -> Result<LatticeAnalysis> {
    if !spec.tractions.is_empty() {
        return Err(Error::Config("edge tractions apply to polygonal meshes only, not to lattices".into()));
    }
    let system = assemble_lattice(model);
    let solution = apply_dirichlet_and_solve(&system, spec, options)?;
    let stresses = model.nodal_stresses(&solution.d);
    let reactions = reactions(&system, &solution.d, spec)?;
    let equilibrium = equilibrium(&system, &reactions);
    Ok(LatticeAnalysis { system, solution, stresses, reactions, equilibrium })
}
