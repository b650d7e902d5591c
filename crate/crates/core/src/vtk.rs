//! Legacy ASCII VTK (version 2.0) unstructured-grid output.
//!
//! P2 velocities are written at every Lagrange node: each triangle is cut
//! into four by its edge midpoints so the point cloud is exactly the set of
//! vertices and edge midpoints. Pressure goes out as one value per original
//! triangle (the mean of its P1 values), repeated on the four sub-cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::{Mesh, Point2};
use crate::solvers::State;

const VTK_TRIANGLE: u8 = 5;

/// Writes the triangulation alone.
pub fn write_mesh_vtk(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let cells: Vec<[usize; 3]> = mesh.triangles().iter().map(|t| t.vertices).collect();
    write_file(path, |w| {
        header(w, "mesh")?;
        points(w, mesh.points())?;
        triangles(w, &cells)
    })
}

/// Writes velocity (point data) and pressure (cell data) of `state`.
pub fn write_solution_vtk(dofmap: &DofMap, state: &State, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = dofmap.n_nodes();
    if state.u.len() != 2 * n {
        return Err(Error::Dimension {
            expected: 2 * n,
            got: state.u.len(),
        });
    }
    if state.p.len() != dofmap.pressure_dofs() {
        return Err(Error::Dimension {
            expected: dofmap.pressure_dofs(),
            got: state.p.len(),
        });
    }
    let mut cells = Vec::with_capacity(4 * dofmap.n_cells());
    let mut pressure = Vec::with_capacity(4 * dofmap.n_cells());
    for t in 0..dofmap.n_cells() {
        let [v0, v1, v2, m0, m1, m2] = *dofmap.velocity_cell(t);
        cells.extend([[v0, m2, m1], [v1, m0, m2], [v2, m1, m0], [m0, m1, m2]]);
        let pc = dofmap.pressure_cell(t);
        let mean = pc.iter().map(|&i| state.p[i]).sum::<f64>() / 3.0;
        pressure.extend([mean; 4]);
    }
    write_file(path, |w| {
        header(w, "velocity and pressure")?;
        points(w, dofmap.node_points())?;
        triangles(w, &cells)?;
        writeln!(w, "POINT_DATA {n}")?;
        writeln!(w, "VECTORS velocity double")?;
        for i in 0..n {
            writeln!(w, "{} {} 0", state.u[i], state.u[n + i])?;
        }
        writeln!(w, "CELL_DATA {}", cells.len())?;
        writeln!(w, "SCALARS pressure double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for p in &pressure {
            writeln!(w, "{p}")?;
        }
        Ok(())
    })
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn header(w: &mut impl Write, title: &str) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 2.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")
}

fn points(w: &mut impl Write, pts: &[Point2]) -> std::io::Result<()> {
    writeln!(w, "POINTS {} double", pts.len())?;
    for p in pts {
        writeln!(w, "{} {} 0", p.x, p.y)?;
    }
    Ok(())
}

fn triangles(w: &mut impl Write, cells: &[[usize; 3]]) -> std::io::Result<()> {
    writeln!(w, "CELLS {} {}", cells.len(), 4 * cells.len())?;
    for c in cells {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "{VTK_TRIANGLE}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{build_dofmap, BoundaryConditionSet, ElementPair};
    use crate::mesh::build_unit_square_mesh;

    fn section_count(text: &str, key: &str) -> usize {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    }

    #[test]
    fn mesh_file_counts() {
        let mesh = build_unit_square_mesh(3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vtk");
        write_mesh_vtk(&mesh, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 2.0"));
        assert_eq!(section_count(&text, "POINTS"), 16);
        assert_eq!(section_count(&text, "CELLS"), 18);
    }

    #[test]
    fn zero_state_writes_zero_fields() {
        let mesh = Arc::new(build_unit_square_mesh(2).unwrap());
        let d = build_dofmap(mesh, ElementPair::TaylorHood, &BoundaryConditionSet::cavity()).unwrap();
        let s = State::zeros(d.velocity_dofs(), d.pressure_dofs());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.vtk");
        write_solution_vtk(&d, &s, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(section_count(&text, "POINTS"), d.n_nodes());
        assert_eq!(section_count(&text, "CELLS"), 4 * d.n_cells());
        let data = text.split("POINT_DATA").nth(1).unwrap();
        let values = data
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with(char::is_alphabetic))
            .flat_map(|l| l.split_whitespace())
            .map(|v| v.parse::<f64>().unwrap());
        assert!(values.into_iter().all(|v| v == 0.0));
    }

    #[test]
    fn wrong_length_rejected() {
        let mesh = Arc::new(build_unit_square_mesh(1).unwrap());
        let d = build_dofmap(mesh, ElementPair::TaylorHood, &BoundaryConditionSet::cavity()).unwrap();
        let s = State::zeros(3, d.pressure_dofs());
        assert!(write_solution_vtk(&d, &s, "/nonexistent/x.vtk").is_err());
    }
}
