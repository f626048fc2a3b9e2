//! Circular bimaterial: disk inclusion of radius `a` in a matrix disk of
//! radius `b`, loaded by `u = (x, y)` on `r = b`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::exact::{radial_stress, BimaterialProblem, Branch};
use super::norms::{lattice_l2_error, vem_l2_error};
use super::{ErrorReport, ModelSelection};
use crate::materials::{AnalysisMode, PhaseTable};
use crate::mesh::{circle_segments, generate_mesh, DomainSpec, GeneratedMesh, Inclusion, MeshOptions, PolygonalMesh, INCLUSION_PHASE, MATRIX_PHASE};
use crate::system::{solve_lattice, solve_vem, BoundarySpec, LatticeAnalysis, SolverOptions, VemAnalysis};
use crate::vclm::{calibrate_springs, LatticeModel, SpringCalibration};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InclusionConfig {
    /// Modular ratio `E_inclusion / E_matrix` (matrix `E = 1`).
    pub eta: f64,
    pub poisson: f64,
    pub a: f64,
    pub b: f64,
    pub mode: AnalysisMode,
    pub spacing: f64,
    pub rng_seed: u64,
    /// Represent the whole inclusion by one virtual element.
    pub single_element: bool,
    pub model: ModelSelection,
    /// Half-width of the band about the positive x axis from which profile
    /// samples are taken; defaults to `spacing`.
    pub profile_band: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for InclusionConfig {
    fn default() -> Self {
        Self {
            eta: 10.0,
            poisson: 0.3,
            a: 0.25,
            b: 1.0,
            mode: AnalysisMode::PlaneStrain,
            spacing: 0.05,
            rng_seed: 1,
            single_element: false,
            model: ModelSelection::Both,
            profile_band: None,
            solver: SolverOptions::default(),
        }
    }
}

impl InclusionConfig {
    pub fn problem(&self) -> Result<BimaterialProblem> {
        BimaterialProblem::with_modular_ratio(self.a, self.b, self.eta, self.poisson, self.mode)
    }

    pub fn domain(&self) -> DomainSpec {
        DomainSpec::circle([0.0, 0.0], self.b).with_inclusion(Inclusion::disk([0.0, 0.0], self.a))
    }
}

/// Radial stress at one element centroid (VEM) or generator point (VCLM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r_over_b: f64,
    pub sigma_rr: f64,
    pub sigma_rr_exact: f64,
    #[serde(skip)]
    pub position: Point,
}

#[derive(Debug, Clone)]
pub struct VemInclusionRun {
    pub mesh: PolygonalMesh,
    pub analysis: VemAnalysis,
    pub report: ErrorReport,
    pub profile: Vec<ProfileSample>,
    /// `(computed, exact)` radial stress of the single inclusion element.
    pub center_stress: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LatticeInclusionRun {
    pub lattice: LatticeModel,
    pub analysis: LatticeAnalysis,
    pub report: ErrorReport,
    pub profile: Vec<ProfileSample>,
}

#[derive(Debug, Clone)]
pub struct InclusionResult {
    pub config: InclusionConfig,
    pub problem: BimaterialProblem,
    pub generated: GeneratedMesh,
    pub vem: Option<VemInclusionRun>,
    pub vclm: Option<LatticeInclusionRun>,
}

impl InclusionResult {
    pub fn reports(&self) -> Vec<ErrorReport> {
        self.vem.iter().map(|r| r.report.clone()).chain(self.vclm.iter().map(|r| r.report.clone())).collect()
    }
}

/// Profile CSV with header `r_over_b,sigma_rr,sigma_rr_exact`.
pub fn profile_csv(samples: &[ProfileSample]) -> String {
    let mut out = String::from("r_over_b,sigma_rr,sigma_rr_exact\n");
    for s in samples {
        out.push_str(&format!("{:?},{:?},{:?}\n", s.r_over_b, s.sigma_rr, s.sigma_rr_exact));
    }
    out
}

/// Checks that element phases agree with the circle `r = a` and that the
/// outer boundary nodes lie on `r = b`.
fn check_conformity(mesh: &PolygonalMesh, config: &InclusionConfig) -> Result<()> {
    let tol = 1e-9 * config.b;
    let chords = circle_segments(config.a, config.spacing, 6) as f64;
    let inner_chord_radius = config.a * (std::f64::consts::PI / chords).cos();
    for (e, el) in mesh.elements.iter().enumerate() {
        for v in el.vertices() {
            let r = mesh.nodes[v].coords.norm();
            let ok = if el.phase == INCLUSION_PHASE { r <= config.a + tol } else { r >= inner_chord_radius - tol };
            if !ok {
                return Err(Error::Config(format!("mesh does not conform to the interface: element {e} has a vertex at r = {r}")));
            }
        }
    }
    let outer = mesh.tagged("outer").ok_or_else(|| Error::Config("mesh has no outer boundary tag".into()))?;
    if let Some(&n) = outer.iter().find(|&&n| (mesh.nodes[n].coords.norm() - config.b).abs() > tol) {
        return Err(Error::Config(format!("outer boundary node {n} is not on r = b")));
    }
    Ok(())
}

fn in_band(p: &Point, band: f64) -> bool {
    p.x >= 0.0 && p.y.abs() <= band
}

fn sort_profile(mut samples: Vec<ProfileSample>) -> Vec<ProfileSample> {
    samples.sort_by(|a, b| a.r_over_b.total_cmp(&b.r_over_b).then(a.position.y.total_cmp(&b.position.y)));
    samples
}

pub fn run_inclusion_benchmark(config: &InclusionConfig) -> Result<InclusionResult> {
    let problem = config.problem()?;
    let generated = generate_mesh(&config.domain(), MeshOptions::new(config.spacing, config.rng_seed))?;
    check_conformity(&generated.mesh, config)?;
    let band = config.profile_band.unwrap_or(config.spacing);
    let exact_u = |p: &Point, phase: u32| problem.displacement_at(p, Branch::of_phase(phase));
    let label = |base: &str| if config.single_element { format!("{base} single-element") } else { base.to_string() };
    let mesh_name = format!("s = {}", config.spacing);

    let vem = if config.model.vem() {
        let mesh = if config.single_element { generated.mesh.merge_phase(INCLUSION_PHASE)? } else { generated.mesh.clone() };
        let phases = PhaseTable::from([(INCLUSION_PHASE, problem.inclusion), (MATRIX_PHASE, problem.matrix)]);
        let mut spec = BoundarySpec::default();
        let outer = mesh.tagged("outer").cloned().unwrap_or_default();
        spec.prescribe_field(outer.iter().map(|&n| (n, &mesh.nodes[n])), |p| p.coords);
        let analysis = solve_vem(&mesh, &phases, &spec, config.solver)?;
        let l2 = vem_l2_error(&mesh, &analysis, |x, e| exact_u(x, mesh.elements[e].phase))?;
        let mut profile = Vec::new();
        let mut center_stress = None;
        for (e, el) in mesh.elements.iter().enumerate() {
            let c = el.geometry.centroid;
            let single = config.single_element && el.phase == INCLUSION_PHASE;
            let at = if single { Point::origin() } else { c };
            if !(single || in_band(&c, band)) {
                continue;
            }
            let branch = Branch::of_phase(el.phase);
            let computed = radial_stress(&analysis.stresses[e].stress, &at);
            let exact = radial_stress(&problem.stress_at(&at, branch)?, &at);
            if single {
                center_stress = Some((computed, exact));
            }
            profile.push(ProfileSample { r_over_b: at.coords.norm() / config.b, sigma_rr: computed, sigma_rr_exact: exact, position: at });
        }
        let report = ErrorReport::new(
            &label("VEM"),
            &mesh_name,
            mesh.elements.len(),
            analysis.assembly.system.num_dofs(),
            l2,
            None,
            analysis.equilibrium.relative_imbalance(),
        );
        Some(VemInclusionRun { mesh, analysis, report, profile: sort_profile(profile), center_stress })
    } else {
        None
    };

    let vclm = if config.model.vclm() {
        let mut lattice = generated.lattice();
        let calibrations: BTreeMap<u32, SpringCalibration> = BTreeMap::from([
            (INCLUSION_PHASE, calibrate_springs(problem.inclusion.young, problem.inclusion.poisson)?),
            (MATRIX_PHASE, calibrate_springs(problem.matrix.young, problem.matrix.poisson)?),
        ]);
        lattice.assign_springs(&calibrations, 1.0)?;
        let mut spec = BoundarySpec::default();
        for (k, n) in lattice.nodes.iter().enumerate().filter(|(_, n)| n.on_boundary) {
            let u = exact_u(&n.position, n.phase)?;
            spec.prescribe(k, 0, u.x);
            spec.prescribe(k, 1, u.y);
        }
        let analysis = solve_lattice(&lattice, &spec, config.solver)?;
        let l2 = lattice_l2_error(&lattice, &analysis, |x, k| exact_u(x, lattice.nodes[k].phase))?;
        let mut profile = Vec::new();
        for (k, n) in lattice.nodes.iter().enumerate() {
            if n.on_boundary || !in_band(&n.position, band) {
                continue;
            }
            let p = n.position;
            profile.push(ProfileSample {
                r_over_b: p.coords.norm() / config.b,
                sigma_rr: radial_stress(&analysis.stresses[k].voigt, &p),
                sigma_rr_exact: radial_stress(&problem.stress_at(&p, Branch::of_phase(n.phase))?, &p),
                position: p,
            });
        }
        let report = ErrorReport::new(
            "VCLM",
            &mesh_name,
            lattice.nodes.len(),
            analysis.system.num_dofs(),
            l2,
            None,
            analysis.equilibrium.relative_imbalance(),
        );
        Some(LatticeInclusionRun { lattice, analysis, report, profile: sort_profile(profile) })
    } else {
        None
    };

    Ok(InclusionResult { config: *config, problem, generated, vem, vclm })
}

/// Largest pointwise relative difference between two VEM profiles over the
/// samples with `r > a` that both share (matched by position).
pub fn profile_deviation(reference: &[ProfileSample], other: &[ProfileSample], a_over_b: f64) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for s in reference.iter().filter(|s| s.r_over_b > a_over_b) {
        if let Some(o) = other.iter().find(|o| (o.position - s.position).norm() <= 1e-12) {
            let d = (o.sigma_rr - s.sigma_rr).abs() / s.sigma_rr.abs();
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_case_is_exact() {
        let config = InclusionConfig { eta: 1.0, spacing: 0.12, ..Default::default() };
        let r = run_inclusion_benchmark(&config).unwrap();
        let vem = r.vem.as_ref().unwrap();
        assert!(vem.report.relative_l2 <= 1e-9, "{}", vem.report.relative_l2);
        for s in &vem.analysis.stresses {
            assert!((s.stress[0] - s.stress[1]).abs() <= 1e-10 * s.stress[0].abs());
            assert!(s.stress[2].abs() <= 1e-10 * s.stress[0].abs());
        }
        let vclm = r.vclm.as_ref().unwrap();
        assert!(vclm.report.relative_l2 <= 1e-8, "{}", vclm.report.relative_l2);
        assert!(vem.report.equilibrium <= 1e-10 && vclm.report.equilibrium <= 1e-10);
    }

    #[test]
    fn profile_csv_header() {
        let s = ProfileSample { r_over_b: 0.5, sigma_rr: 1.25, sigma_rr_exact: 1.0, position: Point::new(0.5, 0.0) };
        assert_eq!(profile_csv(&[s]), "r_over_b,sigma_rr,sigma_rr_exact\n0.5,1.25,1.0\n");
    }

    #[test]
    fn nonconforming_mesh_is_rejected() {
        let config = InclusionConfig { spacing: 0.12, ..Default::default() };
        let mut g = generate_mesh(&config.domain(), MeshOptions::new(0.12, 1)).unwrap();
        // relabel one matrix element next to the interface as inclusion
        let e = (0..g.mesh.elements.len())
            .find(|&e| g.mesh.elements[e].phase == MATRIX_PHASE && g.mesh.elements[e].geometry.centroid.coords.norm() < 0.4)
            .unwrap();
        g.mesh.elements[e].phase = INCLUSION_PHASE;
        assert!(matches!(check_conformity(&g.mesh, &config), Err(Error::Config(_))));
        assert!(check_conformity(&generate_mesh(&config.domain(), MeshOptions::new(0.12, 1)).unwrap().mesh, &config).is_ok());
    }
}
