//! Benchmarks: affine patch tests, the circular bimaterial inclusion with
//! its exact solution, and a three-phase porous composite under compression.

pub mod exact;
pub mod inclusion;
pub mod norms;
pub mod patch;
pub mod three_phase;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use exact::{radial_stress, BimaterialProblem, Branch};
pub use inclusion::{run_inclusion_benchmark, InclusionConfig, InclusionResult, ProfileSample};
pub use norms::{integrate_polygon, lattice_l2_error, lattice_l2_error_of, vem_l2_error, L2Error};
pub use patch::{fig3c_mesh, patch_field, patch_rotation, patch_strain, run_patch_test, PatchConfig, PatchMesh, PatchModel, PatchResult};
pub use three_phase::{default_three_phase_domain, run_three_phase, ThreePhaseConfig, ThreePhaseResult, ThreePhaseRun};

/// Which discretizations a benchmark runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelSelection {
    Vem,
    Vclm,
    #[default]
    Both,
}

impl ModelSelection {
    pub fn vem(self) -> bool {
        matches!(self, Self::Vem | Self::Both)
    }

    pub fn vclm(self) -> bool {
        matches!(self, Self::Vclm | Self::Both)
    }
}

/// One row of an error table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub model: String,
    pub mesh: String,
    pub cells: usize,
    pub dofs: usize,
    pub absolute_l2: f64,
    pub relative_l2: f64,
    /// Largest relative deviation of the recovered stresses from the exact
    /// stress, where one is defined for the benchmark.
    pub stress_error: Option<f64>,
    /// `|Σ loads + Σ reactions| / load scale`.
    pub equilibrium: f64,
}

impl ErrorReport {
    fn new(model: &str, mesh: &str, cells: usize, dofs: usize, l2: L2Error, stress_error: Option<f64>, equilibrium: f64) -> Self {
        Self {
            model: model.into(),
            mesh: mesh.into(),
            cells,
            dofs,
            absolute_l2: l2.absolute,
            relative_l2: l2.relative(),
            stress_error,
            equilibrium,
        }
    }
}

/// Aligned text table of error reports.
pub fn format_reports(title: &str, reports: &[ErrorReport]) -> String {
    let header = ["model", "mesh", "cells", "dofs", "abs L2", "rel L2", "stress err", "equilibrium"];
    let rows: Vec<[String; 8]> = reports
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.mesh.clone(),
                r.cells.to_string(),
                r.dofs.to_string(),
                format!("{:.3e}", r.absolute_l2),
                format!("{:.3e}", r.relative_l2),
                r.stress_error.map_or("-".into(), |s| format!("{s:.3e}")),
                format!("{:.1e}", r.equilibrium),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = format!("{title}\n");
    let line = |cells: Vec<&str>| -> String {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header.to_vec())).unwrap();
    writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")).unwrap();
    for row in &rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect())).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_aligned() {
        let l2 = L2Error { absolute: 1e-3, reference: 2.0 };
        let rows = vec![
            ErrorReport::new("VEM", "coarse", 16, 50, l2, None, 0.0),
            ErrorReport::new("VCLM (calibrated)", "fine", 100, 300, l2, Some(1e-2), 1e-15),
        ];
        let t = format_reports("Patch test", &rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("VEM "));
        assert!(lines[4].contains("5.000e-4"));
        let col = lines[1].find("mesh").unwrap();
        assert_eq!(&lines[4][col..col + 4], "fine");
    }
}
