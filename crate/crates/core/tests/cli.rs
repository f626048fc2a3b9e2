use std::path::Path;
use std::process::{Command, Output};

use vemlat::cli::ResultBundle;
use vemlat::mesh::io::read_mesh;

fn vemlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vemlat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SQUARE: &str = r#"
command = "solve"
model = "both"
spacing = 0.1
rng_seed = 3

[domain]
outer = { kind = "rectangle", min = [0.0, 0.0], max = [1.0, 1.0] }

[[phases]]
id = 2
young = 1.0
poisson = 0.2
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn patch_bench_prints_exact_vem_row() {
    let o = vemlat(&["bench", "patch", "--model", "vem", "--mesh", "coarse"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("VEM")).expect("VEM row");
    let rel: f64 = row.split_whitespace().nth(5).unwrap().parse().unwrap();
    assert!(rel <= 1e-12, "{row}");
}

#[test]
fn inclusion_bench_prints_two_rows() {
    let o = vemlat(&["bench", "inclusion", "--eta", "10", "--model", "both", "--spacing", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("VEM") || l.starts_with("VCLM")).count(), 2, "{out}");
}

#[test]
fn bench_artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let o = vemlat(&["bench", "inclusion", "--eta", "100", "--spacing", "0.1", "--output", &d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("profile-vem.csv")).unwrap();
    assert!(csv.starts_with("r_over_b,sigma_rr,sigma_rr_exact\n"));
    assert!(csv.lines().count() > 5);
    for f in ["inclusion.txt", "inclusion.json", "profile-vclm.csv", "inclusion-vem.vtk", "inclusion-vclm.vtk"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let table = std::fs::read_to_string(dir.path().join("inclusion.txt")).unwrap();
    assert_eq!(table, stdout(&o));
}

#[test]
fn under_constrained_solve_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // only vertical support: horizontal rigid translation is free
    let cfg = write(dir.path(), "run.toml", &format!("{SQUARE}\n[[boundary]]\ntag = \"bottom\"\nv = 0.0\n").replace("\"both\"", "\"vem\""));
    let o = vemlat(&["solve", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("under-constrained"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", &format!("colour = 1\n{SQUARE}\n[[boundary]]\ntag = \"bottom\"\nv = 0.0\nw = 1\n"));
    let o = vemlat(&["solve", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("boundary[0].w, colour"), "{}", stderr(&o));
}

#[test]
fn solve_and_export_pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SQUARE}\n[[boundary]]\ntag = \"bottom\"\nu = 0.0\nv = 0.0\n\n[[boundary]]\ntag = \"top\"\nv = -0.01\n\n[output]\nresults = \"r.json\"\nvtk = \"r.vtk\"\n"
    );
    let cfg = write(dir.path(), "run.toml", &text);
    let first = vemlat(&["solve", &cfg]);
    assert!(first.status.success(), "{}", stderr(&first));
    let a = ResultBundle::read(&dir.path().join("r.json")).unwrap();
    let second = vemlat(&["run", &cfg]);
    assert!(second.status.success());
    let b = ResultBundle::read(&dir.path().join("r.json")).unwrap();
    assert_eq!(a.metadata.mesh_hash, b.metadata.mesh_hash);
    assert_eq!(a.metadata.config_hash, b.metadata.config_hash);
    assert_eq!(a.vem, b.vem);
    assert_eq!(a.vclm, b.vclm);
    let vem = a.vem.as_ref().unwrap();
    assert!(vem.equilibrium <= 1e-10);
    assert!(dir.path().join("r-vem.vtk").exists() && dir.path().join("r-vclm.vtk").exists());

    // mesh file + export: regenerate the same mesh and export from the bundle
    let mesh_cfg = write(
        dir.path(),
        "mesh.toml",
        &(SQUARE.replace("\"solve\"", "\"mesh\"").replace("model = \"both\"\n", "") + "\n[output]\nmesh = \"m.json\"\n"),
    );
    let o = vemlat(&["run", &mesh_cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (mesh, phases) = read_mesh(&dir.path().join("m.json")).unwrap();
    assert_eq!(phases.len(), 1);
    assert_eq!(vem.displacements.len(), mesh.nodes.len());
    let r = dir.path().join("r.json").to_string_lossy().into_owned();
    let m = dir.path().join("m.json").to_string_lossy().into_owned();
    let out = dir.path().join("e.vtk").to_string_lossy().into_owned();
    let o = vemlat(&["export", &r, "--mesh", &m, "--output", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("e-vem.vtk")).unwrap(),
        std::fs::read_to_string(dir.path().join("r-vem.vtk")).unwrap()
    );
    // VEM export without the mesh is an error
    let o = vemlat(&["export", &r, "--output", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mesh_command_writes_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json").to_string_lossy().into_owned();
    let o = vemlat(&["mesh", "--preset", "inclusion", "--spacing", "0.1", "--output", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (mesh, _) = read_mesh(Path::new(&out)).unwrap();
    let phases: std::collections::BTreeSet<u32> = mesh.elements.iter().map(|e| e.phase).collect();
    assert_eq!(phases.len(), 2);
    assert!(stdout(&o).contains("elements"));
}
