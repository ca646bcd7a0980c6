//! Interval and triangle meshes plus the Bernstein DoF lattice built on them.

mod dofmap;
pub mod generate;
mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use dofmap::{build_dof_map, DofMap};
pub use io::{load_mesh_2d, parse_mesh_2d, write_mesh_2d};

use crate::error::{Error, Result};

/// Common geometric view of a simplicial mesh.
///
/// Vertex ids are topological: for a periodic interval the right end of the
/// last cell carries the id of the left end of the first one. Coordinates are
/// per element, so the wrap-around cell keeps its true geometry.
pub trait SimplexMesh: Sync {
    fn dim(&self) -> usize;
    fn n_elements(&self) -> usize;
    fn element_vertices(&self, e: usize) -> Vec<usize>;
    fn element_coords(&self, e: usize) -> Vec<[f64; 2]>;
    fn element_measure(&self, e: usize) -> f64;

    /// Largest vertex-to-vertex distance of the element.
    fn element_diameter(&self, e: usize) -> f64 {
        let c = self.element_coords(e);
        let mut d: f64 = 0.0;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                d = d.max(dist(c[i], c[j]));
            }
        }
        d
    }

    /// Length scale used for the CFL restriction: the cell width in 1D,
    /// twice the inradius in 2D.
    fn element_cfl_length(&self, e: usize) -> f64;
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    pub periodic: bool,
    pub cell_bounds: Vec<[f64; 2]>,
}

/// `n` equal cells on `[a, b]`.
pub fn build_uniform_1d(a: f64, b: f64, n: usize, periodic: bool) -> Result<Mesh1D> {
    if n == 0 {
        return Err(Error::config("interval mesh needs at least one cell"));
    }
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::config(format!("invalid interval bounds [{a}, {b}]")));
    }
    let h = (b - a) / n as f64;
    let cell_bounds = (0..n)
        .map(|i| {
            let left = a + i as f64 * h;
            let right = if i + 1 == n { b } else { a + (i + 1) as f64 * h };
            [left, right]
        })
        .collect();
    Ok(Mesh1D {
        a,
        b,
        n_cells: n,
        periodic,
        cell_bounds,
    })
}

impl Mesh1D {
    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.cell_bounds.iter().map(|c| c[1] - c[0])
    }
}

impl SimplexMesh for Mesh1D {
    fn dim(&self) -> usize {
        1
    }
    fn n_elements(&self) -> usize {
        self.n_cells
    }
    fn element_vertices(&self, e: usize) -> Vec<usize> {
        if self.periodic {
            vec![e, (e + 1) % self.n_cells]
        } else {
            vec![e, e + 1]
        }
    }
    fn element_coords(&self, e: usize) -> Vec<[f64; 2]> {
        let [l, r] = self.cell_bounds[e];
        vec![[l, 0.0], [r, 0.0]]
    }
    fn element_measure(&self, e: usize) -> f64 {
        self.cell_bounds[e][1] - self.cell_bounds[e][0]
    }
    fn element_cfl_length(&self, e: usize) -> f64 {
        self.element_measure(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Outflow,
    Inflow,
    Wall,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Wall => "wall",
        })
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outflow" => Ok(BoundaryTag::Outflow),
            "inflow" => Ok(BoundaryTag::Inflow),
            "wall" => Ok(BoundaryTag::Wall),
            other => Err(Error::mesh(format!("unknown boundary tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeNeighbor {
    Element(usize),
    Boundary(BoundaryTag),
}

/// Mesh edge; `left` is the triangle that traverses `vertices` counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: EdgeNeighbor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
}

impl Mesh2D {
    /// Builds connectivity and validates orientation, manifoldness and tags.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: &[(usize, usize, BoundaryTag)],
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut seen = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::mesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::mesh(format!("triangle {t} repeats a vertex")));
            }
            let mut key = *tri;
            key.sort_unstable();
            if let Some(prev) = seen.insert(key, t) {
                return Err(Error::mesh(format!("triangles {prev} and {t} are duplicates")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::mesh(format!(
                    "triangle {t} is inverted or degenerate (signed area {area:e})"
                )));
            }
        }

        // undirected edge -> (incident triangles as (tri, directed start vertex))
        let mut incidence: HashMap<[usize; 2], Vec<(usize, [usize; 2])>> = HashMap::new();
        let mut order = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = [a.min(b), a.max(b)];
                let entry = incidence.entry(key).or_default();
                if entry.is_empty() {
                    order.push(key);
                }
                entry.push((t, [a, b]));
            }
        }
        let mut tags: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
        for &(i, j, tag) in boundary {
            if i >= nv || j >= nv {
                return Err(Error::mesh(format!(
                    "boundary edge ({i}, {j}) references a missing vertex"
                )));
            }
            tags.insert([i.min(j), i.max(j)], tag);
        }

        let mut edges = Vec::with_capacity(order.len());
        for key in order {
            let inc = &incidence[&key];
            match inc.len() {
                1 => {
                    let tag = tags
                        .remove(&key)
                        .ok_or_else(|| Error::mesh(format!("boundary edge ({}, {}) has no tag", key[0], key[1])))?;
                    edges.push(Edge {
                        vertices: inc[0].1,
                        left: inc[0].0,
                        right: EdgeNeighbor::Boundary(tag),
                    });
                }
                2 => {
                    if inc[0].1 == inc[1].1 {
                        return Err(Error::mesh(format!(
                            "triangles {} and {} have inconsistent orientation",
                            inc[0].0, inc[1].0
                        )));
                    }
                    if tags.remove(&key).is_some() {
                        return Err(Error::mesh(format!(
                            "interior edge ({}, {}) carries a boundary tag",
                            key[0], key[1]
                        )));
                    }
                    edges.push(Edge {
                        vertices: inc[0].1,
                        left: inc[0].0,
                        right: EdgeNeighbor::Element(inc[1].0),
                    });
                }
                n => {
                    return Err(Error::mesh(format!(
                        "non-manifold edge ({}, {}) shared by {n} triangles",
                        key[0], key[1]
                    )))
                }
            }
        }
        if let Some((k, _)) = tags.iter().next() {
            return Err(Error::mesh(format!(
                "tagged edge ({}, {}) is not a mesh edge",
                k[0], k[1]
            )));
        }
        Ok(Mesh2D {
            vertices,
            triangles,
            edges,
        })
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (&Edge, BoundaryTag)> {
        self.edges.iter().filter_map(|e| match e.right {
            EdgeNeighbor::Boundary(tag) => Some((e, tag)),
            EdgeNeighbor::Element(_) => None,
        })
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.element_measure(t)).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.element_diameter(t))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl SimplexMesh for Mesh2D {
    fn dim(&self) -> usize {
        2
    }
    fn n_elements(&self) -> usize {
        self.triangles.len()
    }
    fn element_vertices(&self, e: usize) -> Vec<usize> {
        self.triangles[e].to_vec()
    }
    fn element_coords(&self, e: usize) -> Vec<[f64; 2]> {
        self.triangles[e].iter().map(|&v| self.vertices[v]).collect()
    }
    fn element_measure(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangles[e];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }
    fn element_cfl_length(&self, e: usize) -> f64 {
        let c = self.element_coords(e);
        let perimeter = dist(c[0], c[1]) + dist(c[1], c[2]) + dist(c[2], c[0]);
        // 2 * inradius = 4 |K| / perimeter
        4.0 * self.element_measure(e) / perimeter
    }
}

/// Either mesh kind, as consumed by the discretization.
#[derive(Debug, Clone, PartialEq)]
pub enum Mesh {
    Interval(Mesh1D),
    Triangles(Mesh2D),
}

impl SimplexMesh for Mesh {
    fn dim(&self) -> usize {
        match self {
            Mesh::Interval(m) => m.dim(),
            Mesh::Triangles(m) => m.dim(),
        }
    }
    fn n_elements(&self) -> usize {
        match self {
            Mesh::Interval(m) => m.n_elements(),
            Mesh::Triangles(m) => m.n_elements(),
        }
    }
    fn element_vertices(&self, e: usize) -> Vec<usize> {
        match self {
            Mesh::Interval(m) => m.element_vertices(e),
            Mesh::Triangles(m) => m.element_vertices(e),
        }
    }
    fn element_coords(&self, e: usize) -> Vec<[f64; 2]> {
        match self {
            Mesh::Interval(m) => m.element_coords(e),
            Mesh::Triangles(m) => m.element_coords(e),
        }
    }
    fn element_measure(&self, e: usize) -> f64 {
        match self {
            Mesh::Interval(m) => m.element_measure(e),
            Mesh::Triangles(m) => m.element_measure(e),
        }
    }
    fn element_cfl_length(&self, e: usize) -> f64 {
        match self {
            Mesh::Interval(m) => m.element_cfl_length(e),
            Mesh::Triangles(m) => m.element_cfl_length(e),
        }
    }
}

impl Mesh {
    /// Representative mesh size: cell width in 1D, largest diameter in 2D.
    pub fn h(&self) -> f64 {
        match self {
            Mesh::Interval(m) => m.widths().fold(0.0, f64::max),
            Mesh::Triangles(m) => m.max_diameter(),
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Mesh::Interval(m) if m.periodic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_periodic_widths() {
        let m = build_uniform_1d(0.0, 1.0, 4, true).unwrap();
        assert!(m.widths().all(|w| (w - 0.25).abs() < 1e-15));
        assert_eq!(m.element_vertices(3), vec![3, 0]);
    }

    #[test]
    fn uniform_bounds() {
        let m = build_uniform_1d(-1.0, 1.0, 2, false).unwrap();
        assert_eq!(m.cell_bounds, vec![[-1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.element_vertices(1), vec![1, 2]);
    }

    #[test]
    fn invalid_interval_is_rejected() {
        assert!(build_uniform_1d(0.0, 1.0, 0, true).is_err());
        assert!(build_uniform_1d(1.0, 1.0, 3, false).is_err());
        assert!(build_uniform_1d(2.0, 1.0, 3, false).is_err());
    }

    #[test]
    fn widths_sum_to_length() {
        let m = build_uniform_1d(-5.0, 5.0, 777, false).unwrap();
        let s: f64 = m.widths().sum();
        assert!((s - 10.0).abs() / 10.0 < 1e-14);
    }

    fn square() -> Mesh2D {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 2, 3]];
        let b = [
            (0, 1, BoundaryTag::Wall),
            (1, 2, BoundaryTag::Outflow),
            (2, 3, BoundaryTag::Wall),
            (3, 0, BoundaryTag::Inflow),
        ];
        Mesh2D::new(v, t, &b).unwrap()
    }

    #[test]
    fn two_triangle_square_connectivity() {
        let m = square();
        assert_eq!(m.edges.len(), 5);
        let interior: Vec<_> = m
            .edges
            .iter()
            .filter(|e| matches!(e.right, EdgeNeighbor::Element(_)))
            .collect();
        assert_eq!(interior.len(), 1);
        assert!((m.area() - 1.0).abs() < 1e-15);
        assert!((m.element_diameter(0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inverted_and_nonmanifold_triangles_fail() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh2D::new(v.clone(), vec![[0, 2, 1]], &[]).is_err());
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
        let t = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        let err = Mesh2D::new(v, t, &[]).unwrap_err();
        assert!(err.to_string().contains("orientation") || err.to_string().contains("non-manifold"));
    }

    #[test]
    fn untagged_boundary_fails() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh2D::new(v, vec![[0, 1, 2]], &[(0, 1, BoundaryTag::Wall)]).is_err());
    }
}
