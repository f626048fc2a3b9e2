//! Legacy ASCII VTK (3.0) unstructured-grid export.
//!
//! Polygonal elements become `VTK_POLYGON` cells; elements with holes are
//! triangulated for export only, every triangle carrying the element's
//! data. Lattice results become one polygon per Voronoi cell plus one
//! vertex cell per generator point.

use std::fmt::Write as _;
use std::path::Path;

use super::results::{LatticeResults, StressRecord, VemResults};
use crate::mesh::PolygonalMesh;
use crate::{Error, Point, Result};

const VTK_VERTEX: u8 = 1;
const VTK_TRIANGLE: u8 = 5;
const VTK_POLYGON: u8 = 7;

#[derive(Default)]
struct Grid {
    points: Vec<[f64; 2]>,
    cells: Vec<(u8, Vec<usize>)>,
    /// Source element (or lattice node) of every cell.
    source: Vec<usize>,
}

impl Grid {
    fn write(&self, title: &str, out: &mut String) {
        out.push_str("# vtk DataFile Version 3.0\n");
        writeln!(out, "{}", title.lines().next().unwrap_or("")).unwrap();
        out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
        writeln!(out, "POINTS {} double", self.points.len()).unwrap();
        for p in &self.points {
            writeln!(out, "{:e} {:e} 0", p[0], p[1]).unwrap();
        }
        let size: usize = self.cells.iter().map(|(_, c)| c.len() + 1).sum();
        writeln!(out, "CELLS {} {size}", self.cells.len()).unwrap();
        for (_, c) in &self.cells {
            let ids: Vec<String> = c.iter().map(usize::to_string).collect();
            writeln!(out, "{} {}", c.len(), ids.join(" ")).unwrap();
        }
        writeln!(out, "CELL_TYPES {}", self.cells.len()).unwrap();
        for (t, _) in &self.cells {
            writeln!(out, "{t}").unwrap();
        }
    }
}

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        writeln!(out, "{v:e}").unwrap();
    }
}

fn int_scalars(out: &mut String, name: &str, values: impl Iterator<Item = u64>) {
    writeln!(out, "SCALARS {name} int 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
}

fn stress_data(out: &mut String, grid: &Grid, stresses: &[StressRecord]) {
    let per = |f: fn(&StressRecord) -> f64| grid.source.iter().map(move |&e| f(&stresses[e]));
    scalars(out, "sigma_xx", per(|s| s.stress[0]));
    scalars(out, "sigma_yy", per(|s| s.stress[1]));
    scalars(out, "tau_xy", per(|s| s.stress[2]));
    scalars(out, "principal_major", per(|s| s.principal[0]));
    scalars(out, "principal_minor", per(|s| s.principal[1]));
    scalars(out, "principal_angle", per(|s| s.angle));
}

/// Triangles (as indices into the concatenated loops) covering a polygon
/// with holes.
fn triangulate(loops: &[Vec<Point>]) -> Result<Vec<[usize; 3]>> {
    let mut flat = Vec::new();
    let mut holes = Vec::new();
    for (k, ring) in loops.iter().enumerate() {
        if k > 0 {
            holes.push(flat.len() / 2);
        }
        flat.extend(ring.iter().flat_map(|p| [p.x, p.y]));
    }
    let tri = earcutr::earcut(&flat, &holes, 2).map_err(|e| Error::Config(format!("cannot triangulate element for export: {e:?}")))?;
    Ok(tri.chunks(3).map(|t| [t[0], t[1], t[2]]).collect())
}

/// VTK text for a polygonal mesh with optional VEM results.
pub fn vem_vtk(mesh: &PolygonalMesh, results: Option<&VemResults>, title: &str) -> Result<String> {
    if let Some(r) = results {
        if r.displacements.len() != mesh.nodes.len() || r.stresses.len() != mesh.elements.len() {
            return Err(Error::Config("results do not belong to this mesh".into()));
        }
    }
    let mut grid = Grid { points: mesh.nodes.iter().map(|p| [p.x, p.y]).collect(), ..Default::default() };
    for (e, el) in mesh.elements.iter().enumerate() {
        if el.is_simple() {
            grid.cells.push((VTK_POLYGON, el.loops[0].clone()));
            grid.source.push(e);
        } else {
            let ids: Vec<usize> = el.loops.iter().flatten().copied().collect();
            for t in triangulate(&mesh.element_coords(e))? {
                grid.cells.push((VTK_TRIANGLE, t.iter().map(|&i| ids[i]).collect()));
                grid.source.push(e);
            }
        }
    }
    let mut out = String::new();
    grid.write(title, &mut out);
    if !grid.cells.is_empty() {
        writeln!(out, "CELL_DATA {}", grid.cells.len()).unwrap();
        int_scalars(&mut out, "element", grid.source.iter().map(|&e| e as u64));
        int_scalars(&mut out, "phase", grid.source.iter().map(|&e| mesh.elements[e].phase as u64));
        if let Some(r) = results {
            stress_data(&mut out, &grid, &r.stresses);
        }
    }
    if let (Some(r), false) = (results, grid.points.is_empty()) {
        writeln!(out, "POINT_DATA {}", grid.points.len()).unwrap();
        out.push_str("VECTORS displacement double\n");
        for d in &r.displacements {
            writeln!(out, "{:e} {:e} 0", d[0], d[1]).unwrap();
        }
    }
    Ok(out)
}

/// VTK text for lattice results. Points are the generator points followed
/// by each cell's own copy of its vertices; the displacement at a cell
/// vertex is the rigid-body motion of that cell.
pub fn lattice_vtk(results: &LatticeResults, title: &str) -> String {
    let n = results.positions.len();
    let mut grid = Grid { points: results.positions.clone(), ..Default::default() };
    let mut motion: Vec<[f64; 3]> = results.displacements.clone();
    for (k, cell) in results.cells.iter().enumerate() {
        let [u, v, theta] = results.displacements[k];
        let [x0, y0] = results.positions[k];
        let first = grid.points.len();
        for p in cell {
            grid.points.push(*p);
            motion.push([u - theta * (p[1] - y0), v + theta * (p[0] - x0), theta]);
        }
        grid.cells.push((VTK_POLYGON, (first..first + cell.len()).collect()));
        grid.source.push(k);
    }
    for k in 0..n {
        grid.cells.push((VTK_VERTEX, vec![k]));
        grid.source.push(k);
    }
    let mut out = String::new();
    grid.write(title, &mut out);
    if n > 0 {
        writeln!(out, "CELL_DATA {}", grid.cells.len()).unwrap();
        int_scalars(&mut out, "node", grid.source.iter().map(|&k| k as u64));
        int_scalars(&mut out, "phase", grid.source.iter().map(|&k| results.phases[k] as u64));
        stress_data(&mut out, &grid, &results.stresses);
        writeln!(out, "POINT_DATA {}", grid.points.len()).unwrap();
        out.push_str("VECTORS displacement double\n");
        for m in &motion {
            writeln!(out, "{:e} {:e} 0", m[0], m[1]).unwrap();
        }
        scalars(&mut out, "rotation", motion.iter().map(|m| m[2]));
    }
    out
}

pub fn write_vtk(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
