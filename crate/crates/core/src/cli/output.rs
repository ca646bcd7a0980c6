//! Snapshot, table and manifest writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::basis::multi_indices;
use crate::error::Result;
use crate::space::Discretization;

/// Values of the solution at the DoF control points, sorted by `x`, as
/// `x,u_1..u_K` rows.
pub fn snapshot_csv(disc: &Discretization, coeffs: &[f64], k: usize) -> String {
    let values = disc.point_values(coeffs, k);
    let pos = disc.positions();
    let mut order: Vec<usize> = (0..pos.len()).collect();
    order.sort_by(|&a, &b| pos[a][0].total_cmp(&pos[b][0]));
    let mut out = String::from("x");
    for c in 1..=k {
        let _ = write!(out, ",u_{c}");
    }
    out.push('\n');
    for i in order {
        let _ = write!(out, "{:.12e}", pos[i][0]);
        for v in &values[i * k..(i + 1) * k] {
            let _ = write!(out, ",{v:.12e}");
        }
        out.push('\n');
    }
    out
}

/// Sub-triangles of the degree-`d` lattice, as local DoF indices.
fn lattice_triangles(degree: usize) -> Vec<[usize; 3]> {
    let idx = multi_indices(2, degree);
    let find = |a: usize, b: usize, c: usize| idx.iter().position(|m| m[..] == [a, b, c]).unwrap();
    let mut tris = Vec::new();
    for m in multi_indices(2, degree - 1) {
        let (a, b, c) = (m[0], m[1], m[2]);
        tris.push([find(a + 1, b, c), find(a, b + 1, c), find(a, b, c + 1)]);
    }
    if degree >= 2 {
        for m in multi_indices(2, degree - 2) {
            let (a, b, c) = (m[0], m[1], m[2]);
            tris.push([find(a, b + 1, c + 1), find(a + 1, b, c + 1), find(a + 1, b + 1, c)]);
        }
    }
    tris
}

/// Legacy ASCII VTK unstructured grid with point values at the control
/// points. Each element is split along its Bernstein lattice so every
/// control point is a grid vertex.
pub fn snapshot_vtk(disc: &Discretization, coeffs: &[f64], k: usize, title: &str) -> String {
    let values = disc.point_values(coeffs, k);
    let pos = disc.positions();
    let sub = lattice_triangles(disc.degree);
    let n_cells = disc.n_elements() * sub.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(out, "POINTS {} double", pos.len());
    for p in pos {
        let _ = writeln!(out, "{:.12e} {:.12e} 0", p[0], p[1]);
    }
    let _ = writeln!(out, "CELLS {n_cells} {}", n_cells * 4);
    for dofs in &disc.dofmap.element_dofs {
        for t in &sub {
            let _ = writeln!(out, "3 {} {} {}", dofs[t[0]], dofs[t[1]], dofs[t[2]]);
        }
    }
    let _ = writeln!(out, "CELL_TYPES {n_cells}");
    for _ in 0..n_cells {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {}", pos.len());
    for c in 0..k {
        let _ = writeln!(out, "SCALARS u_{} double 1\nLOOKUP_TABLE default", c + 1);
        for i in 0..pos.len() {
            let _ = writeln!(out, "{:.12e}", values[i * k + c]);
        }
    }
    out
}

/// Samples along the horizontal line at height `y` across the domain's
/// bounding box, as `x,y,u_1..u_K`. Points outside the mesh are skipped.
pub fn slice_csv(disc: &Discretization, coeffs: &[f64], k: usize, y: f64, samples: usize) -> String {
    let pos = disc.positions();
    let (lo, hi) = pos.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p[0]), hi.max(p[0]))
    });
    let mut out = String::from("x,y");
    for c in 1..=k {
        let _ = write!(out, ",u_{c}");
    }
    out.push('\n');
    let n = samples.max(2);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let Some((e, bary)) = disc.locate([x, y]) else {
            continue;
        };
        let u = disc.evaluate(coeffs, k, e, &bary);
        let _ = write!(out, "{x:.12e},{y:.12e}");
        for v in u {
            let _ = write!(out, ",{v:.12e}");
        }
        out.push('\n');
    }
    out
}

/// Resolved settings plus bookkeeping. The settings are written as
/// `key=value` lines and everything else as comments, so the file can be
/// passed back with `--config`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub settings: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
    pub steps: usize,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = format!("# aprd {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (key, value) in &self.settings {
            let _ = writeln!(out, "{key}={value}");
        }
        for o in &self.outputs {
            let _ = writeln!(out, "# output: {}", o.display());
        }
        let _ = writeln!(out, "# steps: {}", self.steps);
        let _ = writeln!(out, "# wall_seconds: {:.3}", self.wall_seconds);
        out
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
