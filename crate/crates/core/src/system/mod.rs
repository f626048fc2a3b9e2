//! Global assembly, boundary conditions, solution and reactions.

mod analysis;
mod solver;
mod sparse;

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analysis::{solve_lattice, solve_vem, LatticeAnalysis, SolverOptions, VemAnalysis};
pub use solver::{conjugate_gradient, relative_residual, reverse_cuthill_mckee, solve_spd, EnvelopeCholesky, SolveStats, SolverKind};
pub use sparse::CsrMatrix;

use crate::materials::PhaseTable;
use crate::mesh::PolygonalMesh;
use crate::vclm::{LatticeModel, DOFS_PER_NODE as LATTICE_DOFS};
use crate::vem::{element_stiffness, VemElementMatrices};
use crate::{Error, Point, Result, Vec2};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletBc {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

/// Constant traction on the boundary edge between nodes `edge.0` and `edge.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TractionBc {
    pub edge: (usize, usize),
    pub traction: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub dirichlet: Vec<DirichletBc>,
    pub tractions: Vec<TractionBc>,
}

impl BoundarySpec {
    pub fn prescribe(&mut self, node: usize, component: usize, value: f64) {
        self.dirichlet.push(DirichletBc { node, component, value });
    }

    /// Prescribes both displacement components of `nodes` from a field.
    pub fn prescribe_field<'a>(&mut self, nodes: impl IntoIterator<Item = (usize, &'a Point)>, field: impl Fn(&Point) -> Vec2) {
        for (n, p) in nodes {
            let u = field(p);
            self.prescribe(n, 0, u.x);
            self.prescribe(n, 1, u.y);
        }
    }

    /// Constraint map `dof → value`, rejecting conflicting duplicates.
    pub fn constrained_dofs(&self, dofs_per_node: usize) -> Result<BTreeMap<usize, f64>> {
        let mut map = BTreeMap::new();
        for bc in &self.dirichlet {
            if bc.component >= dofs_per_node {
                return Err(Error::Config(format!("node {} has no component {}", bc.node, bc.component)));
            }
            let dof = bc.node * dofs_per_node + bc.component;
            if let Some(&old) = map.get(&dof) {
                if old != bc.value {
                    return Err(Error::ConflictingConstraint { node: bc.node, component: bc.component });
                }
            }
            map.insert(dof, bc.value);
        }
        Ok(map)
    }
}

/// Assembled stiffness and load vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    pub dofs_per_node: usize,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.k.n
    }
}

/// Scatter-adds element matrices given with their global DOF lists. The
/// result depends only on the order of `elements`.
pub fn assemble(num_dofs: usize, dofs_per_node: usize, elements: &[(Vec<usize>, DMatrix<f64>)]) -> GlobalSystem {
    let mut triplets = Vec::with_capacity(elements.iter().map(|(d, _)| d.len() * d.len()).sum());
    for (dofs, ke) in elements {
        for (a, &r) in dofs.iter().enumerate() {
            for (b, &c) in dofs.iter().enumerate() {
                triplets.push((r, c, ke[(a, b)]));
            }
        }
    }
    let k = CsrMatrix::from_triplets(num_dofs, triplets);
    let dangling = k.diagonal().iter().filter(|&&d| d == 0.0).count();
    if dangling > 0 {
        log::warn!("{dangling} DOFs have no stiffness; they must be constrained");
    }
    GlobalSystem { k, f: vec![0.0; num_dofs], dofs_per_node }
}

/// Assembled virtual element system with the per-element matrices.
#[derive(Debug, Clone)]
pub struct VemAssembly {
    pub system: GlobalSystem,
    pub elements: Vec<VemElementMatrices>,
    pub constitutive: Vec<Matrix3<f64>>,
}

impl VemAssembly {
    pub fn element_dofs(mesh: &PolygonalMesh, e: usize) -> Vec<usize> {
        mesh.elements[e].vertices().flat_map(|v| [2 * v, 2 * v + 1]).collect()
    }
}

/// Computes every element stiffness (in parallel) and assembles them.
pub fn assemble_vem(mesh: &PolygonalMesh, phases: &PhaseTable) -> Result<VemAssembly> {
    let constitutive: Vec<Matrix3<f64>> = mesh
        .elements
        .iter()
        .map(|el| phases.get(&el.phase).ok_or(Error::UndefinedPhase(el.phase))?.constitutive_matrix())
        .collect::<Result<_>>()?;
    let elements: Vec<VemElementMatrices> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| element_stiffness(e, &mesh.element_coords(e), &constitutive[e]))
        .collect::<Result<_>>()?;
    let contributions: Vec<(Vec<usize>, DMatrix<f64>)> =
        elements.iter().enumerate().map(|(e, m)| (VemAssembly::element_dofs(mesh, e), m.k.clone())).collect();
    let system = assemble(2 * mesh.nodes.len(), 2, &contributions);
    Ok(VemAssembly { system, elements, constitutive })
}

/// Assembles a lattice whose springs have been assigned.
pub fn assemble_lattice(model: &LatticeModel) -> GlobalSystem {
    let contributions: Vec<(Vec<usize>, DMatrix<f64>)> = (0..model.elements.len())
        .into_par_iter()
        .map(|k| {
            let ke = model.element_stiffness(k);
            (model.element_dofs(k).to_vec(), DMatrix::from_column_slice(6, 6, ke.as_slice()))
        })
        .collect();
    assemble(model.num_dofs(), LATTICE_DOFS, &contributions)
}

/// Adds lumped edge tractions (`|e|/2 · t̄` per endpoint) to `sys.f`.
pub fn apply_tractions(sys: &mut GlobalSystem, spec: &BoundarySpec, mesh: &PolygonalMesh) -> Result<()> {
    let boundary: HashSet<(usize, usize)> =
        mesh.boundary_edges().into_iter().map(|(a, b, _)| (a.min(b), a.max(b))).collect();
    for t in &spec.tractions {
        let (a, b) = t.edge;
        if !boundary.contains(&(a.min(b), a.max(b))) {
            return Err(Error::InteriorTraction(a, b));
        }
        let half = 0.5 * (mesh.nodes[b] - mesh.nodes[a]).norm();
        for n in [a, b] {
            for c in 0..2 {
                sys.f[n * sys.dofs_per_node + c] += half * t.traction[c];
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub d: Vec<f64>,
    pub stats: SolveStats,
}

/// Eliminates the prescribed DOFs symmetrically and solves for the rest.
pub fn apply_dirichlet_and_solve(sys: &GlobalSystem, spec: &BoundarySpec, options: SolverOptions) -> Result<Solution> {
    let n = sys.num_dofs();
    let fixed = spec.constrained_dofs(sys.dofs_per_node)?;
    if let Some((&dof, _)) = fixed.range(n..).next() {
        return Err(Error::Config(format!("constrained DOF {dof} does not exist")));
    }
    let mut d = vec![0.0; n];
    for (&dof, &v) in &fixed {
        d[dof] = v;
    }
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains_key(i)).collect();
    if free.is_empty() {
        return Ok(Solution { d, stats: SolveStats { iterations: 0, relative_residual: 0.0, direct: true } });
    }
    let (kff, coupling) = sys.k.split(&free);
    let rhs: Vec<f64> =
        free.iter().zip(&coupling).map(|(&g, row)| sys.f[g] - row.iter().map(|&(c, v)| v * d[c]).sum::<f64>()).collect();
    let (x, stats) = solve_spd(&kff, &rhs, options.kind, options.tolerance, options.max_iterations)?;
    for (&g, xi) in free.iter().zip(x) {
        d[g] = xi;
    }
    Ok(Solution { d, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

/// `K d − f` at every constrained DOF.
pub fn reactions(sys: &GlobalSystem, d: &[f64], spec: &BoundarySpec) -> Result<Vec<Reaction>> {
    let fixed = spec.constrained_dofs(sys.dofs_per_node)?;
    Ok(fixed
        .keys()
        .map(|&dof| {
            let kd: f64 = sys.k.row(dof).map(|(c, v)| v * d[c]).sum();
            Reaction { node: dof / sys.dofs_per_node, component: dof % sys.dofs_per_node, value: kd - sys.f[dof] }
        })
        .collect())
}

/// Net force of applied loads plus reactions, and the load scale it is
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub net_force: [f64; 2],
    pub scale: f64,
}

impl Equilibrium {
    pub fn relative_imbalance(&self) -> f64 {
        let net = self.net_force[0].hypot(self.net_force[1]);
        if self.scale == 0.0 {
            net
        } else {
            net / self.scale
        }
    }
}

pub fn equilibrium(sys: &GlobalSystem, reactions: &[Reaction]) -> Equilibrium {
    let mut net = [0.0; 2];
    let mut scale = 0.0f64;
    for (dof, &f) in sys.f.iter().enumerate() {
        let c = dof % sys.dofs_per_node;
        if c < 2 {
            net[c] += f;
            scale += f.abs();
        }
    }
    for r in reactions.iter().filter(|r| r.component < 2) {
        net[r.component] += r.value;
        scale += r.value.abs();
    }
    Equilibrium { net_force: net, scale }
}
