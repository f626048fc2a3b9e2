//! Machine-readable result bundles (JSON).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::ErrorReport;
use crate::mesh::PolygonalMesh;
use crate::system::{LatticeAnalysis, Reaction, VemAnalysis};
use crate::vclm::LatticeModel;
use crate::vem::PrincipalStress;
use crate::{Error, Result};

pub const FORMAT: &str = "vemlat-results";
pub const VERSION: u32 = 1;

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetadata {
    pub program_version: String,
    pub mesh_hash: String,
    pub config_hash: String,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl RunMetadata {
    pub fn new(mesh_hash: String, config_hash: String) -> Self {
        Self { program_version: env!("CARGO_PKG_VERSION").into(), mesh_hash, config_hash, timings: BTreeMap::new() }
    }
}

/// Voigt stress `(σxx, σyy, τxy)` with principal values `(s1, s2)` and the
/// angle of `s1` from the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressRecord {
    pub stress: [f64; 3],
    pub principal: [f64; 2],
    pub angle: f64,
}

impl StressRecord {
    fn new(voigt: &nalgebra::Vector3<f64>, p: &PrincipalStress) -> Self {
        Self { stress: [voigt[0], voigt[1], voigt[2]], principal: [p.s1, p.s2], angle: p.angle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VemResults {
    /// `(u, v)` per mesh node.
    pub displacements: Vec<[f64; 2]>,
    /// One per element.
    pub stresses: Vec<StressRecord>,
    pub reactions: Vec<Reaction>,
    pub equilibrium: f64,
    pub solver_iterations: usize,
    pub relative_residual: f64,
}

impl VemResults {
    pub fn new(analysis: &VemAnalysis) -> Self {
        let n = analysis.assembly.system.num_dofs() / 2;
        Self {
            displacements: (0..n).map(|k| analysis.displacement(k)).collect(),
            stresses: analysis.stresses.iter().map(|s| StressRecord::new(&s.stress, &s.principal)).collect(),
            reactions: analysis.reactions.clone(),
            equilibrium: analysis.equilibrium.relative_imbalance(),
            solver_iterations: analysis.solution.stats.iterations,
            relative_residual: analysis.solution.stats.relative_residual,
        }
    }
}

/// Lattice results carry their own geometry (generator points and cells),
/// so they can be exported without the tessellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeResults {
    pub positions: Vec<[f64; 2]>,
    pub phases: Vec<u32>,
    pub cells: Vec<Vec<[f64; 2]>>,
    /// `(u, v, θ)` per generator point.
    pub displacements: Vec<[f64; 3]>,
    pub stresses: Vec<StressRecord>,
    pub reactions: Vec<Reaction>,
    pub equilibrium: f64,
    pub solver_iterations: usize,
    pub relative_residual: f64,
}

impl LatticeResults {
    pub fn new(model: &LatticeModel, analysis: &LatticeAnalysis) -> Self {
        Self {
            positions: model.nodes.iter().map(|n| [n.position.x, n.position.y]).collect(),
            phases: model.nodes.iter().map(|n| n.phase).collect(),
            cells: model.nodes.iter().map(|n| n.cell.iter().map(|p| [p.x, p.y]).collect()).collect(),
            displacements: (0..model.nodes.len()).map(|k| analysis.displacement(k)).collect(),
            stresses: analysis.stresses.iter().map(|s| StressRecord::new(&s.voigt, &s.principal)).collect(),
            reactions: analysis.reactions.clone(),
            equilibrium: analysis.equilibrium.relative_imbalance(),
            solver_iterations: analysis.solution.stats.iterations,
            relative_residual: analysis.solution.stats.relative_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub format: String,
    pub version: u32,
    pub metadata: RunMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vem: Option<VemResults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vclm: Option<LatticeResults>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<ErrorReport>,
}

impl ResultBundle {
    pub fn new(metadata: RunMetadata) -> Self {
        Self { format: FORMAT.into(), version: VERSION, metadata, vem: None, vclm: None, reports: Vec::new() }
    }

    /// Array lengths must match the mesh (VEM) and each other (lattice).
    pub fn check(&self, mesh: Option<&PolygonalMesh>) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("inconsistent result bundle: {what}")));
        if let (Some(v), Some(mesh)) = (&self.vem, mesh) {
            if v.displacements.len() != mesh.nodes.len() {
                return bad("VEM displacements do not match the mesh nodes");
            }
            if v.stresses.len() != mesh.elements.len() {
                return bad("VEM stresses do not match the mesh elements");
            }
        }
        if let Some(l) = &self.vclm {
            let n = l.positions.len();
            if [l.phases.len(), l.cells.len(), l.displacements.len(), l.stresses.len()].iter().any(|&m| m != n) {
                return bad("lattice arrays differ in length");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: Self = serde_json::from_str(text)?;
        if bundle.format != FORMAT {
            return Err(Error::Config(format!("not a result bundle (format `{}`)", bundle.format)));
        }
        if bundle.version != VERSION {
            return Err(Error::Config(format!("unsupported result bundle version {}", bundle.version)));
        }
        bundle.check(None)?;
        Ok(bundle)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
