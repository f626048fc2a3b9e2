//! Three-phase porous composite: coated stiff disks in a square, with the
//! space between the coatings left empty, compressed by a uniform downward
//! displacement of the top face.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelSelection;
use crate::materials::{AnalysisMode, MaterialPhase, PhaseTable};
use crate::mesh::{generate_mesh, DomainSpec, GeneratedMesh, Inclusion, MeshOptions, INCLUSION_PHASE, MATRIX_PHASE};
use crate::system::{solve_lattice, solve_vem, BoundarySpec, LatticeAnalysis, Reaction, SolverOptions, VemAnalysis};
use crate::vclm::{calibrate_springs, LatticeModel, SpringCalibration};
use crate::{Error, Result};

/// Rectangle edge indices of the outer polygon.
const BOTTOM: usize = 0;
const TOP: usize = 2;

/// Nine coated disks on a perturbed 3 × 3 grid in the unit square. Adjacent
/// coatings overlap, and the outer ring of coatings overlaps a solid skin
/// along the edges, so the solid phase is connected; the gaps between four
/// neighbouring coatings are pores.
pub fn default_three_phase_domain() -> DomainSpec {
    let centers = [
        (0.20, 0.21),
        (0.50, 0.19),
        (0.80, 0.20),
        (0.19, 0.50),
        (0.51, 0.50),
        (0.81, 0.49),
        (0.20, 0.80),
        (0.49, 0.81),
        (0.80, 0.79),
    ];
    let radii = [0.115, 0.105, 0.12, 0.11, 0.125, 0.105, 0.12, 0.11, 0.115];
    let coating = 0.05;
    let mut d = DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]);
    for (c, r) in centers.iter().zip(radii) {
        d = d.with_inclusion(Inclusion::coated_disk([c.0, c.1], r, coating));
    }
    d.boundary_layer = Some(0.06);
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThreePhaseConfig {
    pub domain: DomainSpec,
    pub spacing: f64,
    pub rng_seed: u64,
    /// Average compressive strain `ε̄_y` (positive shortens the specimen).
    pub strain: f64,
    pub inclusion_young: f64,
    pub paste_young: f64,
    pub poisson: f64,
    pub mode: AnalysisMode,
    /// Also fix the horizontal displacement of the loaded top face.
    pub fix_top_horizontal: bool,
    pub model: ModelSelection,
    pub solver: SolverOptions,
}

impl Default for ThreePhaseConfig {
    fn default() -> Self {
        Self {
            domain: default_three_phase_domain(),
            spacing: 0.018,
            rng_seed: 1,
            strain: 1e-3,
            inclusion_young: 3.0,
            paste_young: 1.0,
            poisson: 0.2,
            mode: AnalysisMode::PlaneStress,
            fix_top_horizontal: false,
            model: ModelSelection::Both,
            solver: SolverOptions::default(),
        }
    }
}

/// Summary of one model's solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreePhaseRun {
    pub model: String,
    pub cells: usize,
    pub reaction_top: [f64; 2],
    pub reaction_bottom: [f64; 2],
    /// `|R_top,y + R_bottom,y| / |R_top,y|`.
    pub reaction_balance: f64,
    pub equilibrium: f64,
    /// Minor principal stress per element (VEM) or interior node (VCLM).
    pub minor_principal: Vec<f64>,
    /// Share of load-path items whose minor principal stress is `≤ 0`.
    pub load_path_compressive_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct ThreePhaseResult {
    pub config: ThreePhaseConfig,
    pub generated: GeneratedMesh,
    pub vem: Option<(VemAnalysis, ThreePhaseRun)>,
    pub vclm: Option<(LatticeModel, LatticeAnalysis, ThreePhaseRun)>,
}

fn resultant(reactions: &[Reaction], nodes: impl Fn(usize) -> bool) -> [f64; 2] {
    let mut r = [0.0; 2];
    for x in reactions.iter().filter(|x| x.component < 2 && nodes(x.node)) {
        r[x.component] += x.value;
    }
    r
}

/// Load-path items are those whose stress magnitude (Euclidean norm of the
/// Voigt stress) is at least the median; returns the share of them whose
/// minor principal stress is non-positive.
fn load_path_fraction(magnitude: &[f64], minor: &[f64]) -> f64 {
    if magnitude.is_empty() {
        return 1.0;
    }
    let mut sorted = magnitude.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let path: Vec<usize> = (0..magnitude.len()).filter(|&k| magnitude[k] >= median).collect();
    path.iter().filter(|&&k| minor[k] <= 0.0).count() as f64 / path.len() as f64
}

fn balance(top: [f64; 2], bottom: [f64; 2]) -> f64 {
    let net = (top[1] + bottom[1]).abs();
    if top[1] == 0.0 {
        net
    } else {
        net / top[1].abs()
    }
}

pub fn run_three_phase(config: &ThreePhaseConfig) -> Result<ThreePhaseResult> {
    if !config.domain.has_voids() {
        log::info!("three-phase domain has no coatings; every cell is solid");
    }
    let (lo, hi) = match config.domain.outer {
        crate::mesh::OuterShape::Rectangle { min, max } => (min, max),
        _ => return Err(Error::Config("the three-phase benchmark needs a rectangular domain".into())),
    };
    let height = hi[1] - lo[1];
    let drop = -config.strain * height;
    let inclusion = MaterialPhase::new(config.inclusion_young, config.poisson, config.mode)?;
    let paste = MaterialPhase::new(config.paste_young, config.poisson, config.mode)?;
    let generated = generate_mesh(&config.domain, MeshOptions::new(config.spacing, config.rng_seed))?;

    let vem = if config.model.vem() {
        let mesh = &generated.mesh;
        let top = mesh.tagged("top").cloned().unwrap_or_default();
        let bottom = mesh.tagged("bottom").cloned().unwrap_or_default();
        if top.is_empty() || bottom.is_empty() {
            return Err(Error::Config("the solid phase does not reach both the top and bottom faces".into()));
        }
        let mut spec = BoundarySpec::default();
        for &n in &top {
            spec.prescribe(n, 1, drop);
            if config.fix_top_horizontal {
                spec.prescribe(n, 0, 0.0);
            }
        }
        for &n in &bottom {
            spec.prescribe(n, 1, 0.0);
        }
        // one horizontal pin removes the remaining rigid translation
        let pin = *bottom.iter().min_by(|&&a, &&b| mesh.nodes[a].x.total_cmp(&mesh.nodes[b].x)).unwrap();
        spec.prescribe(pin, 0, 0.0);
        let phases = PhaseTable::from([(INCLUSION_PHASE, inclusion), (MATRIX_PHASE, paste)]);
        let analysis = solve_vem(mesh, &phases, &spec, config.solver)?;
        let reaction_top = resultant(&analysis.reactions, |n| top.contains(&n));
        let reaction_bottom = resultant(&analysis.reactions, |n| bottom.contains(&n));
        let minor: Vec<f64> = analysis.stresses.iter().map(|s| s.principal.s2).collect();
        let magnitude: Vec<f64> = analysis.stresses.iter().map(|s| s.stress.norm()).collect();
        let run = ThreePhaseRun {
            model: "VEM".into(),
            cells: mesh.elements.len(),
            reaction_top,
            reaction_bottom,
            reaction_balance: balance(reaction_top, reaction_bottom),
            equilibrium: analysis.equilibrium.relative_imbalance(),
            load_path_compressive_fraction: load_path_fraction(&magnitude, &minor),
            minor_principal: minor,
        };
        Some((analysis, run))
    } else {
        None
    };

    let vclm = if config.model.vclm() {
        let tess = &generated.tessellation;
        let mut lattice = generated.lattice();
        let calibrations: BTreeMap<u32, SpringCalibration> = BTreeMap::from([
            (INCLUSION_PHASE, calibrate_springs(inclusion.young, inclusion.poisson)?),
            (MATRIX_PHASE, calibrate_springs(paste.young, paste.poisson)?),
        ]);
        lattice.assign_springs(&calibrations, 1.0)?;
        let touches = |k: usize, edge: usize| tess.boundary_edges_of(lattice.nodes[k].seed).contains(&edge);
        let top: Vec<usize> = (0..lattice.nodes.len()).filter(|&k| touches(k, TOP)).collect();
        let bottom: Vec<usize> = (0..lattice.nodes.len()).filter(|&k| touches(k, BOTTOM)).collect();
        if top.is_empty() || bottom.is_empty() {
            return Err(Error::Config("the lattice does not reach both the top and bottom faces".into()));
        }
        let mut spec = BoundarySpec::default();
        for &k in &top {
            spec.prescribe(k, 1, drop);
            if config.fix_top_horizontal {
                spec.prescribe(k, 0, 0.0);
            }
        }
        for &k in &bottom {
            spec.prescribe(k, 1, 0.0);
        }
        let pin = *bottom.iter().min_by(|&&a, &&b| lattice.nodes[a].position.x.total_cmp(&lattice.nodes[b].position.x)).unwrap();
        spec.prescribe(pin, 0, 0.0);
        let analysis = solve_lattice(&lattice, &spec, config.solver)?;
        let reaction_top = resultant(&analysis.reactions, |n| top.contains(&n));
        let reaction_bottom = resultant(&analysis.reactions, |n| bottom.contains(&n));
        // boundary cells lack the constraint forces in their averaged stress
        let interior: Vec<usize> = (0..lattice.nodes.len()).filter(|&k| !lattice.nodes[k].on_boundary).collect();
        let minor: Vec<f64> = interior.iter().map(|&k| analysis.stresses[k].principal.s2).collect();
        let magnitude: Vec<f64> = interior.iter().map(|&k| analysis.stresses[k].voigt.norm()).collect();
        let run = ThreePhaseRun {
            model: "VCLM".into(),
            cells: lattice.nodes.len(),
            reaction_top,
            reaction_bottom,
            reaction_balance: balance(reaction_top, reaction_bottom),
            equilibrium: analysis.equilibrium.relative_imbalance(),
            load_path_compressive_fraction: load_path_fraction(&magnitude, &minor),
            minor_principal: minor,
        };
        Some((lattice, analysis, run))
    } else {
        None
    };

    Ok(ThreePhaseResult { config: config.clone(), generated, vem, vclm })
}

/// Aligned summary table.
pub fn format_three_phase(runs: &[&ThreePhaseRun]) -> String {
    let mut out = String::from("Three-phase composite under compression\n");
    out.push_str(&format!("{:<6}  {:>6}  {:>13}  {:>13}  {:>9}  {:>11}  {:>9}\n", "model", "cells", "R_top,y", "R_bottom,y", "balance", "equilibrium", "s2<=0"));
    for r in runs {
        out.push_str(&format!(
            "{:<6}  {:>6}  {:>13.6e}  {:>13.6e}  {:>9.1e}  {:>11.1e}  {:>8.1}%\n",
            r.model,
            r.cells,
            r.reaction_top[1],
            r.reaction_bottom[1],
            r.reaction_balance,
            r.equilibrium,
            100.0 * r.load_path_compressive_fraction
        ));
    }
    out
}
