//! TOML run configuration.
//!
//! Relative paths in a configuration file are resolved against the file's
//! directory. Unknown keys anywhere in the file are reported together.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::{InclusionConfig, ModelSelection, PatchConfig, PatchMesh, PatchModel, ThreePhaseConfig};
use crate::materials::{AnalysisMode, MaterialPhase, PhaseTable};
use crate::mesh::io::read_mesh;
use crate::mesh::{DomainSpec, PolygonalMesh, INCLUSION_PHASE, MATRIX_PHASE};
use crate::system::SolverOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Mesh,
    Solve,
    Bench,
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    #[default]
    Patch,
    Inclusion,
    ThreePhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub id: u32,
    pub young: f64,
    pub poisson: f64,
    /// Falls back to the run's `mode`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<AnalysisMode>,
}

/// Conditions on every node carrying `tag`. `u`, `v` prescribe
/// displacements, `rotation` the lattice rotation, `traction` a uniform
/// traction on the boundary edges between tagged nodes (polygonal meshes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traction: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub benchmark: Benchmark,
    /// Patch-test mesh; all three when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch_mesh: Option<PatchMesh>,
    /// Patch-test model; all three when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch_model: Option<PatchModel>,
    pub patch: PatchConfig,
    pub inclusion: InclusionConfig,
    pub three_phase: ThreePhaseConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Mesh file written by `mesh`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    /// Result bundle (JSON).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<PathBuf>,
    /// VTK file; with both models, `-vem` / `-vclm` is appended to the stem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vtk: Option<PathBuf>,
    /// Directory for benchmark artifacts (tables, CSV profiles, VTK).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Default analysis mode of the phases (plane strain).
    #[serde(default)]
    pub mode: AnalysisMode,
    /// Mesh spacing when the mesh is generated from `domain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// Mesh file to read instead of generating one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    /// Result bundle read by `export`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<PhaseConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryCondition>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const DEFAULT_SEED: u64 = 1;

/// Dotted paths of keys in `input` that do not survive a typed round trip.
fn unknown_keys(input: &toml::Value, typed: &toml::Value, path: &str, out: &mut Vec<String>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match (input, typed) {
        (toml::Value::Table(a), toml::Value::Table(b)) => {
            for (k, v) in a {
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &join(k), out),
                    None => out.push(join(k)),
                }
            }
        }
        (toml::Value::Array(a), toml::Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

impl RunConfig {
    /// Parses and checks a configuration without touching the filesystem.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(text)?;
        let config: RunConfig = value.clone().try_into()?;
        let typed = toml::Value::try_from(&config).map_err(|e| Error::Config(e.to_string()))?;
        let mut unknown = Vec::new();
        unknown_keys(&value, &typed, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(Error::UnknownKeys(unknown));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed.unwrap_or(DEFAULT_SEED)
    }

    /// Command-specific required keys and value ranges.
    pub fn validate(&self) -> Result<()> {
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Config(format!("missing required key `{what}`"))) };
        match self.command {
            Command::Mesh => {
                need(self.domain.is_some(), "domain")?;
                need(self.spacing.is_some(), "spacing")?;
            }
            Command::Solve => {
                if self.mesh.is_none() {
                    need(self.domain.is_some(), "mesh` or `domain")?;
                    need(self.spacing.is_some(), "spacing")?;
                }
                need(!self.boundary.is_empty(), "boundary")?;
            }
            Command::Export => need(self.results.is_some(), "results")?,
            Command::Bench => {}
        }
        if let Some(s) = self.spacing {
            if !(s > 0.0) {
                return Err(Error::Config(format!("spacing {s} must be positive")));
            }
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::Config(format!("solver tolerance {} must be positive", self.solver.tolerance)));
        }
        if let Some(d) = &self.domain {
            d.validate()?;
        }
        let mut ids = BTreeSet::new();
        for p in &self.phases {
            if !ids.insert(p.id) {
                return Err(Error::Config(format!("phase {} is defined twice", p.id)));
            }
        }
        for bc in &self.boundary {
            if bc.u.is_none() && bc.v.is_none() && bc.rotation.is_none() && bc.traction.is_none() {
                return Err(Error::Config(format!("boundary condition on `{}` prescribes nothing", bc.tag)));
            }
        }
        Ok(())
    }

    /// Configured phases on top of `base` (e.g. the phases stored in a mesh
    /// file).
    pub fn phase_table(&self, base: &PhaseTable) -> Result<PhaseTable> {
        let mut table = base.clone();
        for p in &self.phases {
            table.insert(p.id, MaterialPhase::new(p.young, p.poisson, p.mode.unwrap_or(self.mode))?);
        }
        Ok(table)
    }

    /// Rebases relative paths onto `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        };
        rebase(&mut self.mesh);
        rebase(&mut self.results);
        rebase(&mut self.output.mesh);
        rebase(&mut self.output.results);
        rebase(&mut self.output.vtk);
        rebase(&mut self.output.directory);
    }
}

/// Every phase id used by `mesh` must be in `phases`.
pub fn check_phases(mesh: &PolygonalMesh, phases: &PhaseTable) -> Result<()> {
    match mesh.elements.iter().map(|e| e.phase).find(|p| !phases.contains_key(p)) {
        Some(p) => Err(Error::UndefinedPhase(p)),
        None => Ok(()),
    }
}

/// Reads, validates and resolves a configuration file. Referenced input
/// files must exist, and for `solve` every phase of the mesh must be
/// defined.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = RunConfig::from_toml_str(&text)?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    for input in [&config.mesh, &config.results].into_iter().flatten() {
        if !input.exists() {
            return Err(Error::Config(format!("referenced file {} does not exist", input.display())));
        }
    }
    if config.command == Command::Solve {
        match (&config.mesh, &config.domain) {
            (Some(file), _) => {
                let (mesh, stored) = read_mesh(file)?;
                check_phases(&mesh, &config.phase_table(&stored)?)?;
            }
            (None, Some(domain)) => {
                let table = config.phase_table(&PhaseTable::new())?;
                let used = if domain.inclusions.is_empty() { vec![MATRIX_PHASE] } else { vec![INCLUSION_PHASE, MATRIX_PHASE] };
                if let Some(&p) = used.iter().find(|p| !table.contains_key(p)) {
                    return Err(Error::UndefinedPhase(p));
                }
            }
            (None, None) => unreachable!("validated"),
        }
    }
    Ok(config)
}
