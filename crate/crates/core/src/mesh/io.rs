//! JSON mesh file (`format = "vemlat-mesh"`, `version = 1`).
//!
//! ```json
//! {
//!   "format": "vemlat-mesh",
//!   "version": 1,
//!   "nodes": [{"id": 0, "x": 0.0, "y": 0.0}, ...],
//!   "elements": [{"id": 0, "phase_id": 1, "loops": [[0, 1, 2, 3]]}, ...],
//!   "node_tags": {"outer": [0, 1, ...]},
//!   "phases": [{"phase_id": 1, "young": 1.0, "poisson": 0.3, "mode": "plane_strain"}]
//! }
//! ```
//!
//! Node and element ids must equal their position in the arrays. Loops list
//! the outer ring first (counter-clockwise), then holes (clockwise).
//! Coordinates are written in shortest round-trip form, so a write/read
//! cycle reproduces every `f64` exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolygonalMesh;
use crate::materials::{AnalysisMode, MaterialPhase, PhaseTable};
use crate::{Error, Point, Result};

pub const FORMAT: &str = "vemlat-mesh";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub id: usize,
    pub phase_id: u32,
    pub loops: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRecord {
    pub phase_id: u32,
    pub young: f64,
    pub poisson: f64,
    #[serde(default)]
    pub mode: AnalysisMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub format: String,
    pub version: u32,
    pub nodes: Vec<NodeRecord>,
    pub elements: Vec<ElementRecord>,
    #[serde(default)]
    pub node_tags: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub phases: Vec<PhaseRecord>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &PolygonalMesh, phases: &PhaseTable) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            nodes: mesh.nodes.iter().enumerate().map(|(id, p)| NodeRecord { id, x: p.x, y: p.y }).collect(),
            elements: mesh
                .elements
                .iter()
                .enumerate()
                .map(|(id, e)| ElementRecord { id, phase_id: e.phase, loops: e.loops.clone() })
                .collect(),
            node_tags: mesh.node_tags.iter().map(|(k, v)| (k.clone(), v.iter().copied().collect())).collect(),
            phases: phases
                .iter()
                .map(|(&phase_id, p)| PhaseRecord { phase_id, young: p.young, poisson: p.poisson, mode: p.mode })
                .collect(),
        }
    }

    pub fn into_mesh(self) -> Result<(PolygonalMesh, PhaseTable)> {
        if self.format != FORMAT {
            return Err(Error::Config(format!("not a mesh file: format = {:?}", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::MeshVersion(self.version));
        }
        for (k, n) in self.nodes.iter().enumerate() {
            if n.id != k {
                return Err(Error::Config(format!("node at position {k} has id {}", n.id)));
            }
        }
        for (k, e) in self.elements.iter().enumerate() {
            if e.id != k {
                return Err(Error::Config(format!("element at position {k} has id {}", e.id)));
            }
        }
        let nodes = self.nodes.iter().map(|n| Point::new(n.x, n.y)).collect();
        let mut mesh = PolygonalMesh::new(nodes, self.elements.into_iter().map(|e| (e.loops, e.phase_id)).collect())?;
        let count = mesh.nodes.len();
        for (name, ids) in self.node_tags {
            if let Some(&bad) = ids.iter().find(|&&i| i >= count) {
                return Err(Error::Config(format!("tag {name:?} references node {bad}")));
            }
            mesh.node_tags.insert(name, ids.into_iter().collect());
        }
        let mut phases = PhaseTable::new();
        for p in self.phases {
            phases.insert(p.phase_id, MaterialPhase::new(p.young, p.poisson, p.mode)?);
        }
        Ok((mesh, phases))
    }
}

pub fn mesh_to_string(mesh: &PolygonalMesh, phases: &PhaseTable) -> String {
    serde_json::to_string_pretty(&MeshFile::from_mesh(mesh, phases)).expect("mesh records always serialize")
}

pub fn mesh_from_str(text: &str) -> Result<(PolygonalMesh, PhaseTable)> {
    serde_json::from_str::<MeshFile>(text)?.into_mesh()
}

pub fn write_mesh(path: &Path, mesh: &PolygonalMesh, phases: &PhaseTable) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh, phases)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<(PolygonalMesh, PhaseTable)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mesh_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, DomainSpec, Inclusion, MeshOptions};
    use proptest::prelude::*;

    #[test]
    fn generated_mesh_round_trip_is_exact() {
        let d = DomainSpec::circle([0.1, -0.2], 1.0).with_inclusion(Inclusion::disk([0.1, -0.2], 0.3));
        let g = generate_mesh(&d, MeshOptions::new(0.15, 9)).unwrap();
        let mut phases = PhaseTable::new();
        phases.insert(1, MaterialPhase::new(10.0, 0.3, AnalysisMode::PlaneStrain).unwrap());
        phases.insert(2, MaterialPhase::new(1.0, 0.3, AnalysisMode::PlaneStrain).unwrap());
        let text = mesh_to_string(&g.mesh, &phases);
        let (back, back_phases) = mesh_from_str(&text).unwrap();
        assert_eq!(back, g.mesh);
        assert_eq!(back_phases, phases);
    }

    #[test]
    fn rejects_wrong_version_and_unknown_fields() {
        let text = r#"{"format":"vemlat-mesh","version":2,"nodes":[],"elements":[]}"#;
        assert!(matches!(mesh_from_str(text), Err(Error::MeshVersion(2))));
        let text = r#"{"format":"vemlat-mesh","version":1,"nodes":[],"elements":[],"colour":1}"#;
        assert!(matches!(mesh_from_str(text), Err(Error::Json(_))));
    }

    proptest! {
        #[test]
        fn coordinates_survive_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite()), y in -1e300f64..1e300) {
            let nodes = vec![Point::new(x, y), Point::new(x + 1.0, y), Point::new(x, y + 1.0)];
            let mesh = PolygonalMesh { nodes, elements: vec![], node_tags: Default::default() };
            let (back, _) = mesh_from_str(&mesh_to_string(&mesh, &PhaseTable::new())).unwrap();
            prop_assert_eq!(back.nodes, mesh.nodes);
        }
    }
}
