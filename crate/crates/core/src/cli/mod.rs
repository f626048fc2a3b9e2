//! Command-line front end: mesh generation, configured solves, the
//! benchmarks, and result export.

pub mod config;
pub mod results;
pub mod vtk;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{parse_config, BenchConfig, Benchmark, BoundaryCondition, Command, PhaseConfig, RunConfig};
pub use results::{LatticeResults, ResultBundle, RunMetadata, StressRecord, VemResults};
pub use vtk::{lattice_vtk, vem_vtk, write_vtk};

use crate::bench::inclusion::profile_csv;
use crate::bench::three_phase::format_three_phase;
use crate::bench::{
    default_three_phase_domain, format_reports, run_inclusion_benchmark, run_patch_test, run_three_phase, ErrorReport,
    InclusionConfig, ModelSelection, PatchConfig, PatchMesh, PatchModel, ThreePhaseConfig,
};
use crate::materials::PhaseTable;
use crate::mesh::io::{mesh_to_string, read_mesh, write_mesh};
use crate::mesh::{generate_mesh, DomainSpec, GeneratedMesh, Inclusion, MeshOptions, OuterShape, PolygonalMesh};
use crate::system::{solve_lattice, solve_vem, BoundarySpec, SolverKind, SolverOptions, TractionBc};
use crate::vclm::{calibrate_springs, SpringCalibration};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "vemlat", version, about = "Virtual element and Voronoi-cell lattice solvers for 2D composites")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Generate a Voronoi mesh and write it as a mesh file.
    Mesh(MeshArgs),
    /// Solve the problem described by a configuration file.
    Solve(SolveArgs),
    /// Run a benchmark and print its report.
    Bench(BenchArgs),
    /// Convert a result bundle to VTK.
    Export(ExportArgs),
    /// Execute whatever command a configuration file names.
    Run {
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// Unit square.
    Square,
    /// Disk of radius 1 with a centred inclusion of radius 0.25.
    Inclusion,
    /// Unit square with nine coated disks and pores.
    ThreePhase,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Configuration file with `domain` and `spacing`.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Mesh file to write.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    vtk: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    config: PathBuf,
    /// Result bundle to write (overrides the configuration).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    vtk: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelSelection>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(subcommand)]
    which: BenchCommand,
    /// Directory for report tables, CSV profiles, JSON records and VTK files.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    solver: Option<CliSolver>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliSolver {
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Affine displacement patch test.
    Patch {
        /// Model; all when absent.
        #[arg(long, value_enum)]
        model: Option<PatchModel>,
        /// Mesh; all when absent.
        #[arg(long, value_enum)]
        mesh: Option<PatchMesh>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        young: Option<f64>,
        #[arg(long)]
        poisson: Option<f64>,
    },
    /// Circular bimaterial inclusion with its exact solution.
    Inclusion {
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum)]
        model: Option<ModelSelection>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        poisson: Option<f64>,
        /// Model the inclusion as one virtual element.
        #[arg(long)]
        single_element: bool,
    },
    /// Porous three-phase composite under compression.
    #[command(name = "threephase")]
    ThreePhase {
        #[arg(long, value_enum)]
        model: Option<ModelSelection>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        strain: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Result bundle.
    results: PathBuf,
    /// Mesh file, needed for VEM results.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// VTK file; with both models `-vem` / `-vclm` is appended to the stem.
    #[arg(short, long)]
    output: PathBuf,
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code: 0 on success, 2 for usage and configuration errors,
/// 3 for I/O errors, 1 for everything else.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownKeys(_) | Error::UndefinedPhase(_) | Error::Toml(_) | Error::InvalidDomain(_) => 2,
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn run(command: CliCommand) -> Result<()> {
    match command {
        CliCommand::Mesh(args) => mesh_command(args),
        CliCommand::Solve(args) => {
            let mut config = parse_config(&args.config)?;
            if config.command != Command::Solve {
                return Err(Error::Config(format!("{} is not a solve configuration", args.config.display())));
            }
            config.output.results = args.output.or(config.output.results);
            config.output.vtk = args.vtk.or(config.output.vtk);
            config.model = args.model.or(config.model);
            solve(&config, &args.config)
        }
        CliCommand::Bench(args) => {
            let mut bench = BenchConfig::default();
            let solver = args.solver.map(|s| {
                SolverOptions::with_kind(match s {
                    CliSolver::Auto => SolverKind::Auto,
                    CliSolver::Direct => SolverKind::Direct,
                    CliSolver::Cg => SolverKind::ConjugateGradient,
                })
            });
            match args.which {
                BenchCommand::Patch { model, mesh, seed, young, poisson } => {
                    bench.patch_model = model;
                    bench.patch_mesh = mesh;
                    let p = &mut bench.patch;
                    p.rng_seed = seed.unwrap_or(p.rng_seed);
                    p.young = young.unwrap_or(p.young);
                    p.poisson = poisson.unwrap_or(p.poisson);
                    p.solver = solver.unwrap_or(p.solver);
                }
                BenchCommand::Inclusion { eta, model, spacing, seed, poisson, single_element } => {
                    bench.benchmark = Benchmark::Inclusion;
                    let c = &mut bench.inclusion;
                    c.eta = eta.unwrap_or(c.eta);
                    c.model = model.unwrap_or(c.model);
                    c.spacing = spacing.unwrap_or(c.spacing);
                    c.rng_seed = seed.unwrap_or(c.rng_seed);
                    c.poisson = poisson.unwrap_or(c.poisson);
                    c.single_element = single_element;
                    c.solver = solver.unwrap_or(c.solver);
                }
                BenchCommand::ThreePhase { model, spacing, seed, strain } => {
                    bench.benchmark = Benchmark::ThreePhase;
                    let c = &mut bench.three_phase;
                    c.model = model.unwrap_or(c.model);
                    c.spacing = spacing.unwrap_or(c.spacing);
                    c.rng_seed = seed.unwrap_or(c.rng_seed);
                    c.strain = strain.unwrap_or(c.strain);
                    c.solver = solver.unwrap_or(c.solver);
                }
            }
            let text = run_bench(&bench, args.output.as_deref())?;
            print!("{text}");
            Ok(())
        }
        CliCommand::Export(args) => export(&args.results, args.mesh.as_deref(), &args.output),
        CliCommand::Run { config: path } => {
            let config = parse_config(&path)?;
            match config.command {
                Command::Mesh => {
                    let generated = generate_mesh(config.domain.as_ref().unwrap(), MeshOptions::new(config.spacing.unwrap(), config.seed()))?;
                    let out = config.output.mesh.clone().unwrap_or_else(|| sibling(&path, "mesh.json"));
                    write_generated(&generated, &config.phase_table(&PhaseTable::new())?, &out, config.output.vtk.as_deref())
                }
                Command::Solve => solve(&config, &path),
                Command::Bench => {
                    let mut bench = config.bench.clone();
                    if let Some(m) = config.model {
                        bench.inclusion.model = m;
                        bench.three_phase.model = m;
                    }
                    if let Some(s) = config.rng_seed {
                        bench.patch.rng_seed = s;
                        bench.inclusion.rng_seed = s;
                        bench.three_phase.rng_seed = s;
                    }
                    let text = run_bench(&bench, config.output.directory.as_deref())?;
                    print!("{text}");
                    Ok(())
                }
                Command::Export => {
                    let out = config.output.vtk.clone().unwrap_or_else(|| sibling(&path, "results.vtk"));
                    export(config.results.as_ref().unwrap(), config.mesh.as_deref(), &out)
                }
            }
        }
    }
}

fn sibling(config: &Path, name: &str) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(name)
}

fn preset_domain(preset: Preset) -> (DomainSpec, f64) {
    match preset {
        Preset::Square => (DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0]), 0.1),
        Preset::Inclusion => (DomainSpec::circle([0.0, 0.0], 1.0).with_inclusion(Inclusion::disk([0.0, 0.0], 0.25)), 0.05),
        Preset::ThreePhase => (default_three_phase_domain(), 0.018),
    }
}

fn mesh_command(args: MeshArgs) -> Result<()> {
    let (domain, spacing, seed, phases) = match &args.config {
        Some(path) => {
            let c = parse_config(path)?;
            let domain = c.domain.clone().ok_or_else(|| Error::Config("the configuration has no `domain`".into()))?;
            let spacing = args.spacing.or(c.spacing).ok_or_else(|| Error::Config("missing `spacing`".into()))?;
            (domain, spacing, args.seed.unwrap_or(c.seed()), c.phase_table(&PhaseTable::new())?)
        }
        None => {
            let (domain, spacing) = preset_domain(args.preset.unwrap_or(Preset::Square));
            (domain, args.spacing.unwrap_or(spacing), args.seed.unwrap_or(config::DEFAULT_SEED), PhaseTable::new())
        }
    };
    let generated = generate_mesh(&domain, MeshOptions::new(spacing, seed))?;
    let out = args.output.unwrap_or_else(|| PathBuf::from("mesh.json"));
    write_generated(&generated, &phases, &out, args.vtk.as_deref())
}

fn write_generated(generated: &GeneratedMesh, phases: &PhaseTable, out: &Path, vtk: Option<&Path>) -> Result<()> {
    let mesh = &generated.mesh;
    write_mesh(out, mesh, phases)?;
    if let Some(path) = vtk {
        write_vtk(path, &vem_vtk(mesh, None, "vemlat mesh")?)?;
    }
    let used: BTreeSet<u32> = mesh.elements.iter().map(|e| e.phase).collect();
    println!(
        "{} elements, {} nodes, phases {:?}, area {:.6} -> {}",
        mesh.elements.len(),
        mesh.nodes.len(),
        used,
        mesh.area(),
        out.display()
    );
    Ok(())
}

/// Nodes of a polygonal mesh carrying `tag`.
fn mesh_tag<'a>(mesh: &'a PolygonalMesh, tag: &str) -> Result<&'a BTreeSet<usize>> {
    mesh.tagged(tag).ok_or_else(|| {
        let known: Vec<&str> = mesh.node_tags.keys().map(String::as_str).collect();
        Error::Config(format!("unknown node tag `{tag}` (mesh tags: {})", known.join(", ")))
    })
}

fn vem_boundary(mesh: &PolygonalMesh, conditions: &[BoundaryCondition]) -> Result<BoundarySpec> {
    let mut spec = BoundarySpec::default();
    let edges = mesh.boundary_edges();
    for bc in conditions {
        let nodes = mesh_tag(mesh, &bc.tag)?;
        for &n in nodes {
            for (component, value) in [(0, bc.u), (1, bc.v)] {
                if let Some(v) = value {
                    spec.prescribe(n, component, v);
                }
            }
        }
        if let Some(t) = bc.traction {
            for &(a, b, _) in edges.iter().filter(|(a, b, _)| nodes.contains(a) && nodes.contains(b)) {
                spec.tractions.push(TractionBc { edge: (a, b), traction: t });
            }
        }
    }
    Ok(spec)
}

/// Lattice nodes per boundary tag: `outer` is every cell touching the
/// boundary, and on rectangles `bottom`, `right`, `top`, `left` are the
/// cells touching that side.
fn lattice_tags(generated: &GeneratedMesh, lattice: &crate::vclm::LatticeModel) -> BTreeMap<String, BTreeSet<usize>> {
    let names = generated.domain.outer_edge_tags(generated.options.spacing);
    let mut tags: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (k, node) in lattice.nodes.iter().enumerate() {
        if node.on_boundary {
            tags.entry("outer".into()).or_default().insert(k);
        }
        for edge in generated.tessellation.boundary_edges_of(node.seed) {
            if let Some(Some(name)) = names.get(edge) {
                tags.entry(name.to_string()).or_default().insert(k);
            }
        }
    }
    tags
}

fn solve(config: &RunConfig, config_path: &Path) -> Result<()> {
    let model = config.model.unwrap_or(ModelSelection::Vem);
    let mut timings = BTreeMap::new();
    let t = Instant::now();
    let (mesh, stored, generated) = match &config.mesh {
        Some(file) => {
            let (mesh, stored) = read_mesh(file)?;
            (mesh, stored, None)
        }
        None => {
            let g = generate_mesh(config.domain.as_ref().unwrap(), MeshOptions::new(config.spacing.unwrap(), config.seed()))?;
            (g.mesh.clone(), PhaseTable::new(), Some(g))
        }
    };
    timings.insert("mesh".to_string(), t.elapsed().as_secs_f64());
    let phases = config.phase_table(&stored)?;
    config::check_phases(&mesh, &phases)?;
    let mesh_hash = results::sha256_hex(mesh_to_string(&mesh, &phases).as_bytes());
    let config_hash = results::sha256_hex(config.to_toml_string()?.as_bytes());
    let mut bundle = ResultBundle::new(RunMetadata::new(mesh_hash, config_hash));

    if model.vem() {
        let t = Instant::now();
        let spec = vem_boundary(&mesh, &config.boundary)?;
        let analysis = solve_vem(&mesh, &phases, &spec, config.solver)?;
        timings.insert("vem".to_string(), t.elapsed().as_secs_f64());
        let r = VemResults::new(&analysis);
        println!(
            "VEM: {} elements, {} dofs, relative residual {:.2e}, equilibrium {:.2e}",
            mesh.elements.len(),
            analysis.assembly.system.num_dofs(),
            r.relative_residual,
            r.equilibrium
        );
        bundle.vem = Some(r);
    }
    if model.vclm() {
        let generated = generated.as_ref().ok_or_else(|| {
            Error::Config("the lattice model needs the Voronoi tessellation; give `domain` instead of a mesh file".into())
        })?;
        let t = Instant::now();
        let mut lattice = generated.lattice();
        let calibrations: BTreeMap<u32, SpringCalibration> =
            phases.iter().map(|(&id, p)| Ok((id, calibrate_springs(p.young, p.poisson)?))).collect::<Result<_>>()?;
        lattice.assign_springs(&calibrations, 1.0)?;
        let tags = lattice_tags(generated, &lattice);
        let mut spec = BoundarySpec::default();
        for bc in &config.boundary {
            if bc.traction.is_some() {
                return Err(Error::Config("tractions are not supported by the lattice model".into()));
            }
            let nodes = tags.get(&bc.tag).ok_or_else(|| {
                Error::Config(format!("unknown lattice boundary tag `{}` (known: outer, bottom, right, top, left)", bc.tag))
            })?;
            for &k in nodes {
                for (component, value) in [(0, bc.u), (1, bc.v), (2, bc.rotation)] {
                    if let Some(v) = value {
                        spec.prescribe(k, component, v);
                    }
                }
            }
        }
        let analysis = solve_lattice(&lattice, &spec, config.solver)?;
        timings.insert("vclm".to_string(), t.elapsed().as_secs_f64());
        let r = LatticeResults::new(&lattice, &analysis);
        println!(
            "VCLM: {} cells, {} dofs, relative residual {:.2e}, equilibrium {:.2e}",
            lattice.nodes.len(),
            analysis.system.num_dofs(),
            r.relative_residual,
            r.equilibrium
        );
        bundle.vclm = Some(r);
    }
    bundle.metadata.timings = timings;
    bundle.check(Some(&mesh))?;
    let out = config.output.results.clone().unwrap_or_else(|| sibling(config_path, "results.json"));
    bundle.write(&out)?;
    println!("results -> {}", out.display());
    if let Some(vtk) = &config.output.vtk {
        write_bundle_vtk(&bundle, Some(&mesh), vtk)?;
    }
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}-{suffix}{ext}"))
}

fn write_bundle_vtk(bundle: &ResultBundle, mesh: Option<&PolygonalMesh>, path: &Path) -> Result<()> {
    let both = bundle.vem.is_some() && bundle.vclm.is_some();
    if let Some(v) = &bundle.vem {
        let mesh = mesh.ok_or_else(|| Error::Config("VEM results need the mesh file for export (--mesh)".into()))?;
        let out = if both { suffixed(path, "vem") } else { path.to_path_buf() };
        write_vtk(&out, &vem_vtk(mesh, Some(v), "vemlat VEM results")?)?;
        println!("VTK -> {}", out.display());
    }
    if let Some(l) = &bundle.vclm {
        let out = if both { suffixed(path, "vclm") } else { path.to_path_buf() };
        write_vtk(&out, &lattice_vtk(l, "vemlat VCLM results"))?;
        println!("VTK -> {}", out.display());
    }
    Ok(())
}

fn export(results: &Path, mesh: Option<&Path>, out: &Path) -> Result<()> {
    let bundle = ResultBundle::read(results)?;
    let mesh = match mesh {
        Some(p) => Some(read_mesh(p)?.0),
        None => None,
    };
    bundle.check(mesh.as_ref())?;
    write_bundle_vtk(&bundle, mesh.as_ref(), out)
}

fn write_text(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn reports_json(reports: &[ErrorReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)? + "\n")
}

/// Runs a benchmark and returns its printed report. With `dir`, the report,
/// machine-readable records and any profiles / VTK files are written there.
pub fn run_bench(bench: &BenchConfig, dir: Option<&Path>) -> Result<String> {
    match bench.benchmark {
        Benchmark::Patch => patch_bench(bench, dir),
        Benchmark::Inclusion => inclusion_bench(&bench.inclusion, dir),
        Benchmark::ThreePhase => three_phase_bench(&bench.three_phase, dir),
    }
}

fn patch_bench(bench: &BenchConfig, dir: Option<&Path>) -> Result<String> {
    let config: &PatchConfig = &bench.patch;
    let meshes = bench.patch_mesh.map_or(vec![PatchMesh::Coarse, PatchMesh::Fine, PatchMesh::Inclusion], |m| vec![m]);
    let models =
        bench.patch_model.map_or(vec![PatchModel::Vem, PatchModel::VclmCalibrated, PatchModel::VclmEqualSprings], |m| vec![m]);
    let mut reports = Vec::new();
    for &model in &models {
        for &mesh in &meshes {
            // the hand-built mesh has no tessellation for a lattice
            if mesh == PatchMesh::Inclusion && model != PatchModel::Vem && bench.patch_mesh.is_none() {
                continue;
            }
            let r = run_patch_test(mesh, model, config)?;
            if let (Some(v), Some(dir)) = (&r.vem, dir) {
                let text = vem_vtk(&r.mesh, Some(&VemResults::new(v)), "patch test")?;
                write_text(Some(dir), &format!("patch-{}-vem.vtk", mesh.name()), &text)?;
            }
            reports.push(r.report);
        }
    }
    let table = format_reports("Patch test: u = 1 + x + y, v = 2 - 3x - 4y", &reports);
    write_text(dir, "patch.txt", &table)?;
    write_text(dir, "patch.json", &reports_json(&reports)?)?;
    Ok(table)
}

fn inclusion_bench(config: &InclusionConfig, dir: Option<&Path>) -> Result<String> {
    let r = run_inclusion_benchmark(config)?;
    let mode = match config.mode {
        crate::materials::AnalysisMode::PlaneStrain => "plane strain",
        crate::materials::AnalysisMode::PlaneStress => "plane stress",
    };
    let mut text = format_reports(
        &format!("Bimaterial inclusion: eta = {}, nu = {}, a/b = {}, {mode}", config.eta, config.poisson, config.a / config.b),
        &r.reports(),
    );
    if let Some((computed, exact)) = r.vem.as_ref().and_then(|v| v.center_stress) {
        text.push_str(&format!(
            "sigma_rr(0): computed {computed:.6e}, exact {exact:.6e}, relative error {:.3e}\n",
            (computed - exact).abs() / exact.abs()
        ));
    }
    if let Some(v) = &r.vem {
        write_text(dir, "profile-vem.csv", &profile_csv(&v.profile))?;
        if dir.is_some() {
            write_text(dir, "inclusion-vem.vtk", &vem_vtk(&v.mesh, Some(&VemResults::new(&v.analysis)), "inclusion")?)?;
        }
    }
    if let Some(l) = &r.vclm {
        write_text(dir, "profile-vclm.csv", &profile_csv(&l.profile))?;
        if dir.is_some() {
            write_text(dir, "inclusion-vclm.vtk", &lattice_vtk(&LatticeResults::new(&l.lattice, &l.analysis), "inclusion"))?;
        }
    }
    write_text(dir, "inclusion.txt", &text)?;
    write_text(dir, "inclusion.json", &reports_json(&r.reports())?)?;
    Ok(text)
}

fn three_phase_bench(config: &ThreePhaseConfig, dir: Option<&Path>) -> Result<String> {
    if !matches!(config.domain.outer, OuterShape::Rectangle { .. }) {
        return Err(Error::Config("the three-phase benchmark needs a rectangular domain".into()));
    }
    let r = run_three_phase(config)?;
    let mut runs = Vec::new();
    if let Some((analysis, run)) = &r.vem {
        if dir.is_some() {
            write_text(dir, "threephase-vem.vtk", &vem_vtk(&r.generated.mesh, Some(&VemResults::new(analysis)), "three-phase")?)?;
        }
        runs.push(run);
    }
    if let Some((lattice, analysis, run)) = &r.vclm {
        if dir.is_some() {
            write_text(dir, "threephase-vclm.vtk", &lattice_vtk(&LatticeResults::new(lattice, analysis), "three-phase"))?;
        }
        runs.push(run);
    }
    let text = format_three_phase(&runs);
    write_text(dir, "threephase.txt", &text)?;
    let summary: Vec<serde_json::Value> = runs
        .iter()
        .map(|run| {
            serde_json::json!({
                "model": run.model,
                "cells": run.cells,
                "reaction_top": run.reaction_top,
                "reaction_bottom": run.reaction_bottom,
                "reaction_balance": run.reaction_balance,
                "equilibrium": run.equilibrium,
                "load_path_compressive_fraction": run.load_path_compressive_fraction,
            })
        })
        .collect();
    write_text(dir, "threephase.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    Ok(text)
}
