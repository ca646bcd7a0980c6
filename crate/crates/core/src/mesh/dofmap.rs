use std::collections::HashMap;

use super::SimplexMesh;
use crate::basis::{check_degree, multi_indices};
use crate::error::Result;

/// Conforming global numbering of the Bernstein control points.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub n_dofs: usize,
    /// Global ids per element, in local multi-index order.
    pub element_dofs: Vec<Vec<usize>>,
    /// Incident elements per global DoF.
    pub dof_elements: Vec<Vec<usize>>,
    /// Control-point coordinates, taken from the first incident element.
    pub positions: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum LatticeKey {
    Vertex(usize),
    /// Edge (lower vertex id, higher vertex id, multiplicity at the lower vertex).
    Edge(usize, usize, usize),
    Interior(usize, usize),
}

pub fn build_dof_map<M: SimplexMesh + ?Sized>(mesh: &M, degree: usize) -> Result<DofMap> {
    check_degree(degree)?;
    let dim = mesh.dim();
    let indices = multi_indices(dim, degree);
    let mut ids: HashMap<LatticeKey, usize> = HashMap::new();
    let mut element_dofs = Vec::with_capacity(mesh.n_elements());
    let mut positions = Vec::new();
    let d = degree as f64;

    for e in 0..mesh.n_elements() {
        let verts = mesh.element_vertices(e);
        let coords = mesh.element_coords(e);
        let mut local = Vec::with_capacity(indices.len());
        for (l, alpha) in indices.iter().enumerate() {
            let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0).collect();
            let key = match support.len() {
                1 => LatticeKey::Vertex(verts[support[0]]),
                n if n == dim + 1 => LatticeKey::Interior(e, l),
                _ => {
                    let (i, j) = (support[0], support[1]);
                    let (vi, vj) = (verts[i], verts[j]);
                    if vi < vj {
                        LatticeKey::Edge(vi, vj, alpha[i])
                    } else {
                        LatticeKey::Edge(vj, vi, alpha[j])
                    }
                }
            };
            let next = ids.len();
            let id = *ids.entry(key).or_insert(next);
            if id == next {
                let mut p = [0.0, 0.0];
                for (a, c) in alpha.iter().zip(&coords) {
                    p[0] += *a as f64 / d * c[0];
                    p[1] += *a as f64 / d * c[1];
                }
                positions.push(p);
            }
            local.push(id);
        }
        element_dofs.push(local);
    }

    let n_dofs = ids.len();
    let mut dof_elements = vec![Vec::new(); n_dofs];
    for (e, dofs) in element_dofs.iter().enumerate() {
        for &g in dofs {
            if dof_elements[g].last() != Some(&e) {
                dof_elements[g].push(e);
            }
        }
    }
    Ok(DofMap {
        degree,
        n_dofs,
        element_dofs,
        dof_elements,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_1d, BoundaryTag, Mesh2D};

    #[test]
    fn periodic_interval_identifies_endpoints() {
        let m = build_uniform_1d(0.0, 1.0, 2, true).unwrap();
        let dm = build_dof_map(&m, 2).unwrap();
        assert_eq!(dm.n_dofs, 4);
        assert_eq!(dm.element_dofs[0][0], dm.element_dofs[1][2]);
        for n in [1, 3, 7] {
            for d in 1..=3 {
                let m = build_uniform_1d(0.0, 1.0, n, true).unwrap();
                assert_eq!(build_dof_map(&m, d).unwrap().n_dofs, d * n);
            }
        }
    }

    #[test]
    fn open_interval_count() {
        let m = build_uniform_1d(0.0, 1.0, 4, false).unwrap();
        assert_eq!(build_dof_map(&m, 1).unwrap().n_dofs, 5);
        assert!(build_dof_map(&m, 4).is_err());
    }

    #[test]
    fn single_triangle_cubic() {
        let m = Mesh2D::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[
                (0, 1, BoundaryTag::Wall),
                (1, 2, BoundaryTag::Wall),
                (2, 0, BoundaryTag::Wall),
            ],
        )
        .unwrap();
        let dm = build_dof_map(&m, 3).unwrap();
        assert_eq!(dm.n_dofs, 10);
        assert_eq!(dm.element_dofs[0].len(), 10);
    }

    #[test]
    fn shared_edge_dofs_agree() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 2, 3]];
        let b = [
            (0, 1, BoundaryTag::Wall),
            (1, 2, BoundaryTag::Wall),
            (2, 3, BoundaryTag::Wall),
            (3, 0, BoundaryTag::Wall),
        ];
        let m = Mesh2D::new(v, t, &b).unwrap();
        let dm = build_dof_map(&m, 3).unwrap();
        // 4 vertices + 5 edges * 2 + 2 interiors
        assert_eq!(dm.n_dofs, 16);
        // DoFs on the diagonal (0-2) appear in both triangles with identical coordinates
        let diag: Vec<usize> = (0..dm.n_dofs)
            .filter(|&g| {
                let p = dm.positions[g];
                (p[0] - p[1]).abs() < 1e-12
            })
            .collect();
        assert_eq!(diag.len(), 4);
        for g in diag {
            assert_eq!(dm.dof_elements[g], vec![0, 1]);
        }
    }
}
